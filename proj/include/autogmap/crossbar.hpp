#pragma once

// Functional crossbar check: multiply through the mapped blocks only and
// compare with the dense product; split blocks into crossbar-sized tiles.

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autogmap/error.hpp"
#include "autogmap/matrix.hpp"
#include "autogmap/reorder.hpp"
#include "autogmap/scheme.hpp"

namespace autogmap {

/// y = A x for dense reference checks.
inline std::vector<double> dense_spmv(const SparseMatrix& m, std::span<const double> x) {
  if (x.size() != m.dim()) throw ArgumentError("vector length does not match dimension");
  std::vector<double> y(m.dim(), 0.0);
  for (const auto& e : m.entries()) y[e.row] += e.value * x[e.col];
  return y;
}

/// Product using only the entries inside blocks. Accumulates block by block
/// (canonical block order), row by row within each block.
inline std::vector<double> blockwise_spmv(const SparseMatrix& m, const MappingScheme& s, std::span<const double> x) {
  if (x.size() != m.dim() || s.dim != m.dim()) throw ArgumentError("dimension mismatch");
  // Row start offsets into the row-major sorted entry list.
  const auto& entries = m.entries();
  std::vector<std::size_t> row_start(m.dim() + 1, 0);
  for (const auto& e : entries) ++row_start[e.row + 1];
  for (Index r = 0; r < m.dim(); ++r) row_start[r + 1] += row_start[r];

  std::vector<double> y(m.dim(), 0.0);
  for (const auto& block : s.blocks()) {
    const Rect& b = block.rect;
    for (Index r = b.row0; r < b.row0 + b.height; ++r) {
      auto first = entries.begin() + static_cast<std::ptrdiff_t>(row_start[r]);
      auto last = entries.begin() + static_cast<std::ptrdiff_t>(row_start[r + 1]);
      auto it = std::lower_bound(first, last, b.col0, [](const Entry& e, Index c) { return e.col < c; });
      for (; it != last && it->col < b.col0 + b.width; ++it) y[r] += it->value * x[it->col];
    }
  }
  return y;
}

/// First nonzero (row-major) outside every block, if any.
inline std::optional<Entry> first_uncovered(const SparseMatrix& m, const MappingScheme& s) {
  const auto blocks = s.blocks();
  for (const auto& e : m.entries()) {
    const bool inside = std::any_of(blocks.begin(), blocks.end(), [&](const Block& b) { return b.rect.contains(e.row, e.col); });
    if (!inside) return e;
  }
  return std::nullopt;
}

/// x' = P x, y' = blockwise(P A P^T, s, x'), y = P^T y'.
/// Throws CoverageError (in original coordinates) if s misses a nonzero.
inline std::vector<double> end_to_end(const SparseMatrix& m, const Permutation& p, const MappingScheme& s, std::span<const double> x) {
  const SparseMatrix permuted = permute_matrix(m, p);
  if (s.dim != m.dim()) throw ArgumentError("dimension mismatch");
  if (auto miss = first_uncovered(permuted, s)) {
    const Permutation inv = p.inverse();
    throw CoverageError(inv[miss->row], inv[miss->col]);
  }
  const auto xp = permute_vector(x, p);
  const auto yp = blockwise_spmv(permuted, s, xp);
  return inverse_permute_vector(yp, p);
}

struct Tile {
  Index block = 0;  // id into MappingScheme::blocks()
  Index row0 = 0;
  Index col0 = 0;
  Index height = 0;
  Index width = 0;
};

struct TileManifest {
  Index crossbar = 0;
  std::vector<Tile> tiles;
  Index tile_count = 0;
  Index occupied = 0;  // cells in use, equals the summed block area
};

/// Splits each block row-major into ceil(h/k) * ceil(w/k) tiles.
inline TileManifest tile_manifest(const MappingScheme& s, Index k) {
  if (k < 1) throw ArgumentError("crossbar size must be at least 1");
  TileManifest out;
  out.crossbar = k;
  const auto blocks = s.blocks();
  for (Index id = 0; id < blocks.size(); ++id) {
    const Rect& b = blocks[id].rect;
    for (Index r = 0; r < b.height; r += k) {
      for (Index c = 0; c < b.width; c += k) {
        Tile t{id, b.row0 + r, b.col0 + c, std::min(k, b.height - r), std::min(k, b.width - c)};
        out.occupied += t.height * t.width;
        out.tiles.push_back(t);
      }
    }
  }
  out.tile_count = out.tiles.size();
  return out;
}

inline nlohmann::ordered_json to_json(const TileManifest& mf) {
  nlohmann::ordered_json j;
  j["crossbar"] = mf.crossbar;
  auto tiles = nlohmann::ordered_json::array();
  for (const auto& t : mf.tiles) {
    nlohmann::ordered_json e;
    e["block"] = t.block;
    e["row"] = t.row0;
    e["col"] = t.col0;
    e["height"] = t.height;
    e["width"] = t.width;
    tiles.push_back(std::move(e));
  }
  j["tiles"] = std::move(tiles);
  j["totals"] = {{"tiles", mf.tile_count}, {"occupied", mf.occupied}};
  return j;
}

}  // namespace autogmap
