#pragma once

// Fixed-size comparison schemes and the exhaustive oracle over the whole
// generative action space of a small grid.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "autogmap/error.hpp"
#include "autogmap/evaluator.hpp"
#include "autogmap/matrix.hpp"
#include "autogmap/scheme.hpp"

namespace autogmap {

/// Diagonal blocks [B, B, ..., remainder].
inline MappingScheme vanilla_scheme(Index dim, Index block) {
  if (block < 1 || block > dim) throw ArgumentError("block size must lie in [1, dim]");
  std::vector<Index> sizes;
  for (Index offset = 0; offset < dim; offset += block) sizes.push_back(std::min(block, dim - offset));
  MappingScheme s = scheme_from_sizes(dim, sizes);
  s.grid = block;
  return s;
}

/// Vanilla diagonal plus a fill of min(F, left, right) at every junction.
inline MappingScheme vanilla_fill_scheme(Index dim, Index block, Index fill) {
  if (fill < 1) throw ArgumentError("fill size must be at least 1");
  MappingScheme s = vanilla_scheme(dim, block);
  for (Index j = 0; j + 1 < s.diag_blocks.size(); ++j) {
    const Index f = std::min({fill, s.diag_blocks[j].size, s.diag_blocks[j + 1].size});
    add_fill(s, j, f);
  }
  s.grades = 2;
  return s;
}

struct OracleResult {
  MappingScheme best_scheme;
  EvalResult best_eval;
  double best_reward = 0.0;
  DiagonalActions best_diagonal;
  FillActions best_fill;
  std::uint64_t enumerated_count = 0;
  // Minimum-area scheme among those with complete coverage.
  std::optional<MappingScheme> best_complete_scheme;
  std::optional<EvalResult> best_complete_eval;
};

/// Number of action sequences the generative process can emit:
/// sum over diagonal patterns of G^(zeros) = (1 + G)^(n_cells - 1).
/// Returns nullopt on overflow.
inline std::optional<std::uint64_t> action_space_size(Index n_cells, Index grades) {
  std::uint64_t total = 1;
  const std::uint64_t base = 1 + static_cast<std::uint64_t>(grades);
  for (Index i = 1; i < n_cells; ++i) {
    if (total > std::numeric_limits<std::uint64_t>::max() / base) return std::nullopt;
    total *= base;
  }
  return total;
}

inline constexpr std::uint64_t kDefaultOracleCap = 10'000'000;

namespace detail {

inline bool lex_less(const DiagonalActions& da, const FillActions& fa, const DiagonalActions& db, const FillActions& fb) {
  if (da.bits != db.bits) return da.bits < db.bits;
  return fa.grades < fb.grades;
}

}  // namespace detail

/// Maximum-reward scheme; ties go to smaller area, then to the
/// lexicographically smaller (diagonal, fill) action pair.
inline OracleResult brute_force_best(const SparseMatrix& m, Index k, Index grades, double alpha,
                                     std::uint64_t cap = kDefaultOracleCap, FillMode mode = FillMode::dynamic()) {
  const GridSpec grid = make_grid(m.dim(), k);
  const auto space = action_space_size(grid.n_cells(), grades);
  if (!space || *space > cap) {
    throw CapacityError("action space of " + (space ? std::to_string(*space) : std::string("more than 2^64")) +
                        " schemes exceeds the enumeration cap " + std::to_string(cap));
  }
  const PrefixIndex index(m);
  const Index n = grid.n_decisions();

  OracleResult out;
  bool have = false;
  DiagonalActions diag;
  diag.bits.assign(n, 0);
  for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << n); ++pattern) {
    // bit 0 of the action vector is the most significant bit of `pattern`
    for (Index b = 0; b < n; ++b) diag.bits[b] = static_cast<std::uint8_t>((pattern >> (n - 1 - b)) & 1U);
    const auto blocks = parse_diagonal(diag, grid);
    const Index gaps = diag.zeros();
    FillActions fill;
    fill.grades.assign(gaps, 0);
    while (true) {
      MappingScheme s;
      s.dim = grid.dim;
      s.grid = grid.cell;
      s.grades = grades;
      s.diag_blocks = blocks;
      s.fill_blocks = parse_fill(fill, blocks, grades, grid, mode);
      const EvalResult ev = evaluate(s, index, alpha);
      ++out.enumerated_count;

      bool take = !have || ev.reward > out.best_reward ||
                  (ev.reward == out.best_reward && (ev.area < out.best_eval.area ||
                                                    (ev.area == out.best_eval.area && detail::lex_less(diag, fill, out.best_diagonal, out.best_fill))));
      if (take) {
        out.best_scheme = s;
        out.best_eval = ev;
        out.best_reward = ev.reward;
        out.best_diagonal = diag;
        out.best_fill = fill;
        have = true;
      }
      if (ev.complete() && (!out.best_complete_eval || ev.area < out.best_complete_eval->area)) {
        out.best_complete_scheme = s;
        out.best_complete_eval = ev;
      }

      // next fill combination, last position fastest
      Index pos = gaps;
      while (pos > 0 && fill.grades[pos - 1] + 1 == grades) fill.grades[--pos] = 0;
      if (pos == 0) break;
      ++fill.grades[pos - 1];
    }
  }
  return out;
}

}  // namespace autogmap
