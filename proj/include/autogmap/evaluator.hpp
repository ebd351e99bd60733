#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

#include "autogmap/error.hpp"
#include "autogmap/matrix.hpp"
#include "autogmap/scheme.hpp"

namespace autogmap {

struct EvalResult {
  double coverage = 0.0;  // covered nonzeros / total nonzeros
  double area = 0.0;      // block area / dim^2
  double sparsity = 0.0;  // 1 - covered nonzeros / block area
  double reward = 0.0;    // a * coverage + (1 - a) * (1 - area)
  std::size_t covered = 0;
  std::size_t total = 0;

  bool complete() const noexcept { return covered == total; }
};

inline double area_ratio(const MappingScheme& s) {
  const double d = static_cast<double>(s.dim);
  return static_cast<double>(s.block_area()) / (d * d);
}

inline double scalarized_reward(double alpha, double coverage, double area) {
  return alpha * coverage + (1.0 - alpha) * (1.0 - area);
}

/// Blocks are disjoint for valid schemes, so per-block counts sum exactly.
inline EvalResult evaluate(const MappingScheme& s, const PrefixIndex& idx, double alpha) {
  if (s.dim != idx.dim()) {
    throw ArgumentError("dimension mismatch: scheme " + std::to_string(s.dim) + ", matrix " + std::to_string(idx.dim()));
  }
  EvalResult r;
  r.total = idx.total();
  for (const auto& d : s.diag_blocks) r.covered += idx.count(d.offset, d.offset, d.size, d.size);
  for (const auto& f : s.fill_blocks) {
    r.covered += idx.count(f.row0, f.col0, f.size, f.size);
    r.covered += idx.count(f.col0, f.row0, f.size, f.size);
  }
  const Index area_cells = s.block_area();
  r.coverage = r.total == 0 ? 1.0 : static_cast<double>(r.covered) / static_cast<double>(r.total);
  r.area = area_ratio(s);
  r.sparsity = area_cells == 0 ? 0.0 : 1.0 - static_cast<double>(r.covered) / static_cast<double>(area_cells);
  r.reward = scalarized_reward(alpha, r.coverage, r.area);
  return r;
}

namespace detail {
inline double round6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return std::stod(buf);
}
}  // namespace detail

/// Values rounded to 6 decimal places.
inline nlohmann::ordered_json to_json(const EvalResult& r) {
  nlohmann::ordered_json j;
  j["coverage"] = detail::round6(r.coverage);
  j["area"] = detail::round6(r.area);
  j["sparsity"] = detail::round6(r.sparsity);
  j["reward"] = detail::round6(r.reward);
  return j;
}

}  // namespace autogmap
