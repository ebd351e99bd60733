#pragma once

// Grid partitioning and the decoding of action sequences into block
// geometry.
//
// Diagonal actions carry one bit per interior grid boundary: 0 starts a new
// diagonal block at that boundary, 1 extends the current one. Every 0 opens a
// gap (junction between two consecutive diagonal blocks) that receives one
// fill decision. A fill of size f at a junction ending at element offset e
// occupies rows [e-f, e) x cols [e, e+f) plus its mirror across the diagonal.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autogmap/error.hpp"
#include "autogmap/matrix.hpp"

namespace autogmap {

struct GridSpec {
  Index dim = 0;
  Index cell = 0;
  std::vector<Index> boundaries;  // 0, k, 2k, ..., dim

  Index n_cells() const noexcept { return boundaries.empty() ? 0 : boundaries.size() - 1; }
  Index n_decisions() const noexcept { return n_cells() == 0 ? 0 : n_cells() - 1; }
  Index cell_size(Index c) const { return boundaries.at(c + 1) - boundaries.at(c); }
};

/// Cells of size k; the last one is ragged when k does not divide dim.
inline GridSpec make_grid(Index dim, Index k) {
  if (k < 1 || k > dim) throw ArgumentError("grid size " + std::to_string(k) + " must lie in [1, " + std::to_string(dim) + "]");
  GridSpec g{dim, k, {}};
  for (Index b = 0; b < dim; b += k) g.boundaries.push_back(b);
  g.boundaries.push_back(dim);
  return g;
}

struct DiagonalActions {
  std::vector<std::uint8_t> bits;

  Index zeros() const { return static_cast<Index>(std::count(bits.begin(), bits.end(), std::uint8_t{0})); }
  friend bool operator==(const DiagonalActions&, const DiagonalActions&) = default;
};

struct FillActions {
  std::vector<std::uint32_t> grades;

  friend bool operator==(const FillActions&, const FillActions&) = default;
};

struct DiagBlock {
  Index offset = 0;
  Index size = 0;

  friend bool operator==(const DiagBlock&, const DiagBlock&) = default;
};

/// Upper fill square at junction `gap` (between diagonal blocks gap and
/// gap+1). The mirror square sits at (col0, row0).
struct FillBlock {
  Index gap = 0;
  Index row0 = 0;
  Index col0 = 0;
  Index size = 0;

  friend bool operator==(const FillBlock&, const FillBlock&) = default;
};

struct Rect {
  Index row0 = 0;
  Index col0 = 0;
  Index height = 0;
  Index width = 0;

  Index area() const noexcept { return height * width; }
  bool contains(Index r, Index c) const noexcept { return r >= row0 && r < row0 + height && c >= col0 && c < col0 + width; }
  bool overlaps(const Rect& o) const noexcept {
    return row0 < o.row0 + o.height && o.row0 < row0 + height && col0 < o.col0 + o.width && o.col0 < col0 + width;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

enum class BlockKind { diagonal, fill, mirror };

inline const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::diagonal: return "diagonal";
    case BlockKind::fill: return "fill";
    case BlockKind::mirror: return "mirror";
  }
  return "?";
}

struct Block {
  BlockKind kind = BlockKind::diagonal;
  Index source = 0;  // index into diag_blocks or fill_blocks
  Rect rect;
};

struct MappingScheme {
  Index dim = 0;
  Index grid = 0;    // grid cell size the scheme was decoded on (0 if hand-built)
  Index grades = 0;  // fill grades count (0 if not applicable)
  std::vector<DiagBlock> diag_blocks;
  std::vector<FillBlock> fill_blocks;

  /// All squares in canonical order: diagonal blocks, then each fill
  /// followed by its mirror. Block ids used elsewhere index this list.
  std::vector<Block> blocks() const {
    std::vector<Block> out;
    out.reserve(diag_blocks.size() + 2 * fill_blocks.size());
    for (Index i = 0; i < diag_blocks.size(); ++i) {
      const auto& d = diag_blocks[i];
      out.push_back({BlockKind::diagonal, i, {d.offset, d.offset, d.size, d.size}});
    }
    for (Index i = 0; i < fill_blocks.size(); ++i) {
      const auto& f = fill_blocks[i];
      out.push_back({BlockKind::fill, i, {f.row0, f.col0, f.size, f.size}});
      out.push_back({BlockKind::mirror, i, {f.col0, f.row0, f.size, f.size}});
    }
    return out;
  }

  /// Sum of block areas in elements (fills counted twice for the mirror).
  Index block_area() const noexcept {
    Index a = 0;
    for (const auto& d : diag_blocks) a += d.size * d.size;
    for (const auto& f : fill_blocks) a += 2 * f.size * f.size;
    return a;
  }

  std::vector<Index> diagonal_sizes() const {
    std::vector<Index> s;
    s.reserve(diag_blocks.size());
    for (const auto& d : diag_blocks) s.push_back(d.size);
    return s;
  }

  std::vector<Index> fill_sizes() const {
    std::vector<Index> s;
    s.reserve(fill_blocks.size());
    for (const auto& f : fill_blocks) s.push_back(f.size);
    return s;
  }

  friend bool operator==(const MappingScheme&, const MappingScheme&) = default;
};

/// Fixed mode fills min(F, sL, sR) on every nonzero grade; dynamic mode maps
/// grade g to floor(g / (G-1) * sL) clipped to min(sL, sR).
struct FillMode {
  enum class Kind { fixed, dynamic };
  Kind kind = Kind::dynamic;
  Index fixed_size = 0;

  static FillMode dynamic() { return {Kind::dynamic, 0}; }
  static FillMode fixed(Index f) { return {Kind::fixed, f}; }
};

/// Merges consecutive cells while the action is 1.
inline std::vector<DiagBlock> parse_diagonal(const DiagonalActions& a, const GridSpec& g) {
  if (a.bits.size() != g.n_decisions()) {
    throw ArgumentError("diagonal action length " + std::to_string(a.bits.size()) + " does not match " +
                        std::to_string(g.n_decisions()) + " grid decisions");
  }
  std::vector<DiagBlock> blocks;
  Index start = 0;
  for (Index b = 0; b < a.bits.size(); ++b) {
    if (a.bits[b] > 1) throw ArgumentError("diagonal actions must be 0 or 1");
    if (a.bits[b] == 0) {
      const Index boundary = g.boundaries[b + 1];
      blocks.push_back({start, boundary - start});
      start = boundary;
    }
  }
  blocks.push_back({start, g.dim - start});
  return blocks;
}

/// Inverse of parse_diagonal for blocks whose edges lie on grid boundaries.
inline DiagonalActions encode_diagonal(const std::vector<DiagBlock>& blocks, const GridSpec& g) {
  DiagonalActions a;
  a.bits.assign(g.n_decisions(), 1);
  Index pos = 0;
  for (Index i = 0; i + 1 < blocks.size(); ++i) {
    pos += blocks[i].size;
    auto it = std::lower_bound(g.boundaries.begin(), g.boundaries.end(), pos);
    if (it == g.boundaries.end() || *it != pos || pos == 0 || pos >= g.dim) throw ArgumentError("block edge " + std::to_string(pos) + " is not an interior grid boundary");
    a.bits[static_cast<Index>(it - g.boundaries.begin()) - 1] = 0;
  }
  return a;
}

/// Size of the fill at a junction between blocks of sizes left and right.
inline Index fill_size(std::uint32_t grade, Index left, Index right, Index grades, FillMode mode) {
  if (grade >= grades) throw ArgumentError("fill grade " + std::to_string(grade) + " must be below " + std::to_string(grades));
  if (grade == 0) return 0;
  Index f = 0;
  if (mode.kind == FillMode::Kind::fixed) {
    f = mode.fixed_size;
  } else {
    f = static_cast<Index>(grade) * left / (grades - 1);
  }
  return std::min({f, left, right});
}

/// One fill decision per junction; zero-size fills are dropped.
inline std::vector<FillBlock> parse_fill(const FillActions& z, const std::vector<DiagBlock>& diag, Index grades, const GridSpec& g,
                                         FillMode mode) {
  if (grades < 2) throw ArgumentError("fill grades must be at least 2");
  if (diag.empty() || z.grades.size() != diag.size() - 1) {
    throw ArgumentError("fill action length " + std::to_string(z.grades.size()) + " does not match " +
                        std::to_string(diag.empty() ? 0 : diag.size() - 1) + " gaps");
  }
  Index total = 0;
  for (const auto& d : diag) total += d.size;
  if (total != g.dim) throw ArgumentError("diagonal blocks do not span the grid dimension");
  std::vector<FillBlock> fills;
  for (Index j = 0; j < z.grades.size(); ++j) {
    const Index f = fill_size(z.grades[j], diag[j].size, diag[j + 1].size, grades, mode);
    if (f == 0) continue;
    const Index e = diag[j + 1].offset;
    fills.push_back({j, e - f, e, f});
  }
  return fills;
}

/// Full decode of an action pair.
inline MappingScheme decode_scheme(const DiagonalActions& a, const FillActions& z, const GridSpec& g, Index grades, FillMode mode) {
  MappingScheme s;
  s.dim = g.dim;
  s.grid = g.cell;
  s.grades = grades;
  s.diag_blocks = parse_diagonal(a, g);
  s.fill_blocks = parse_fill(z, s.diag_blocks, grades, g, mode);
  return s;
}

/// Diagonal blocks only, from a list of sizes.
inline MappingScheme scheme_from_sizes(Index dim, const std::vector<Index>& sizes) {
  MappingScheme s;
  s.dim = dim;
  Index offset = 0;
  for (Index sz : sizes) {
    s.diag_blocks.push_back({offset, sz});
    offset += sz;
  }
  return s;
}

/// Adds a fill of size f at junction `gap` of an existing scheme.
inline void add_fill(MappingScheme& s, Index gap, Index f) {
  if (gap + 1 >= s.diag_blocks.size()) throw ArgumentError("gap " + std::to_string(gap) + " has no junction");
  const Index e = s.diag_blocks[gap + 1].offset;
  if (f > e) throw ArgumentError("fill larger than its junction offset");
  s.fill_blocks.push_back({gap, e - f, e, f});
}

struct Violation {
  std::string kind;
  std::vector<Index> blocks;  // ids into MappingScheme::blocks()
  std::string detail;
};

/// Checks tiling of the diagonal, bounds, pairwise disjointness, and fill
/// placement. An empty result means the scheme is valid.
inline std::vector<Violation> validate(const MappingScheme& s) {
  std::vector<Violation> out;
  const auto blocks = s.blocks();

  Index expect = 0;
  bool tiled = !s.diag_blocks.empty();
  for (const auto& d : s.diag_blocks) {
    if (d.offset != expect || d.size == 0) tiled = false;
    expect = d.offset + d.size;
  }
  if (expect != s.dim) tiled = false;
  if (!tiled) {
    std::vector<Index> ids(s.diag_blocks.size());
    for (Index i = 0; i < ids.size(); ++i) ids[i] = i;
    out.push_back({"diagonal not tiled", ids, "diagonal blocks cover [0, " + std::to_string(expect) + ") of " + std::to_string(s.dim)});
  }

  for (Index b = 0; b < blocks.size(); ++b) {
    const auto& r = blocks[b].rect;
    if (r.row0 + r.height > s.dim || r.col0 + r.width > s.dim) {
      out.push_back({"out of bounds", {b}, std::string(to_string(blocks[b].kind)) + " block exceeds the matrix"});
    }
  }

  for (Index f = 0; f < s.fill_blocks.size(); ++f) {
    const auto& fb = s.fill_blocks[f];
    const Index id = s.diag_blocks.size() + 2 * f;
    bool ok = fb.gap + 1 < s.diag_blocks.size() && fb.size > 0;
    if (ok) {
      const auto& left = s.diag_blocks[fb.gap];
      const auto& right = s.diag_blocks[fb.gap + 1];
      const Index e = right.offset;
      ok = fb.col0 == e && fb.row0 + fb.size == e && fb.size <= left.size && fb.size <= right.size;
    }
    if (!ok) out.push_back({"fill not at junction", {id, id + 1}, "fill " + std::to_string(f) + " is not flush against its junction"});
  }

  for (Index a = 0; a < blocks.size(); ++a) {
    for (Index b = a + 1; b < blocks.size(); ++b) {
      if (blocks[a].rect.area() > 0 && blocks[b].rect.area() > 0 && blocks[a].rect.overlaps(blocks[b].rect)) {
        out.push_back({"overlap", {a, b}, "blocks " + std::to_string(a) + " and " + std::to_string(b) + " overlap"});
      }
    }
  }
  return out;
}

inline nlohmann::ordered_json to_json(const MappingScheme& s) {
  nlohmann::ordered_json j;
  j["dim"] = s.dim;
  j["grid"] = s.grid;
  j["grades"] = s.grades;
  j["diagonal"] = s.diagonal_sizes();
  auto fills = nlohmann::ordered_json::array();
  for (const auto& f : s.fill_blocks) {
    nlohmann::ordered_json e;
    e["gap"] = f.gap;
    e["size"] = f.size;
    fills.push_back(std::move(e));
  }
  j["fills"] = std::move(fills);
  return j;
}

template <typename Json>
MappingScheme scheme_from_json(const Json& j) {
  try {
    MappingScheme s = scheme_from_sizes(j.at("dim").template get<Index>(), j.at("diagonal").template get<std::vector<Index>>());
    s.grid = j.value("grid", Index{0});
    s.grades = j.value("grades", Index{0});
    if (j.contains("fills")) {
      for (const auto& f : j.at("fills")) add_fill(s, f.at("gap").template get<Index>(), f.at("size").template get<Index>());
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed scheme JSON: ") + e.what());
  }
}

}  // namespace autogmap
