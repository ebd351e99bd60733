#pragma once

// Sparse square matrices: Matrix Market I/O, synthetic generators, and the
// dense prefix-sum index used for O(1) rectangle nonzero counts.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "autogmap/error.hpp"
#include "autogmap/random.hpp"

namespace autogmap {

using Index = std::size_t;

struct Entry {
  Index row = 0;
  Index col = 0;
  double value = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Square matrix stored as a row-major sorted list of unique coordinates.
/// Immutable after construction.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Sorts the entries and rejects out-of-range or duplicate coordinates.
  SparseMatrix(Index dim, std::vector<Entry> entries) : dim_(dim), entries_(std::move(entries)) {
    if (dim_ == 0) throw ArgumentError("matrix dimension must be positive");
    for (const auto& e : entries_) {
      if (e.row >= dim_ || e.col >= dim_) {
        throw ArgumentError("entry (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                            ") outside dimension " + std::to_string(dim_));
      }
    }
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    auto dup = std::adjacent_find(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
      return a.row == b.row && a.col == b.col;
    });
    if (dup != entries_.end()) {
      throw ArgumentError("duplicate entry (" + std::to_string(dup->row) + ", " +
                          std::to_string(dup->col) + ")");
    }
  }

  Index dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  /// 1 - nnz / dim^2
  double sparsity() const noexcept {
    const double area = static_cast<double>(dim_) * static_cast<double>(dim_);
    return area == 0.0 ? 0.0 : 1.0 - static_cast<double>(nnz()) / area;
  }

  bool contains(Index row, Index col) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{row, col},
                               [](const Entry& e, const std::pair<Index, Index>& key) {
                                 return e.row != key.first ? e.row < key.first : e.col < key.second;
                               });
    return it != entries_.end() && it->row == row && it->col == col;
  }

  bool has_symmetric_pattern() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [this](const Entry& e) { return contains(e.col, e.row); });
  }

  /// Row-major dense copy, for tests and small verification runs.
  std::vector<double> to_dense() const {
    std::vector<double> dense(dim_ * dim_, 0.0);
    for (const auto& e : entries_) dense[e.row * dim_ + e.col] = e.value;
    return dense;
  }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  Index dim_ = 0;
  std::vector<Entry> entries_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

template <typename T>
T parse_number(std::string_view token, std::size_t line, const char* what) {
  T value{};
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace detail

/// Reads a Matrix Market coordinate file (general or symmetric; real,
/// integer or pattern). Symmetric entries are mirrored, pattern entries get
/// value 1.0, and indices are converted to 0-based.
inline SparseMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError(1, "empty input");
  ++lineno;
  const auto banner = detail::split_ws(detail::trim(line));
  if (banner.size() != 5 || detail::lower(banner[0]) != "%%matrixmarket") {
    throw ParseError(lineno, "malformed header, expected '%%MatrixMarket matrix coordinate <field> <symmetry>'");
  }
  if (detail::lower(banner[1]) != "matrix" || detail::lower(banner[2]) != "coordinate") {
    throw ParseError(lineno, "only 'matrix coordinate' files are supported");
  }
  const std::string field = detail::lower(banner[3]);
  const std::string symmetry = detail::lower(banner[4]);
  if (field != "real" && field != "integer" && field != "pattern") {
    throw ParseError(lineno, "unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    throw ParseError(lineno, "unsupported symmetry '" + symmetry + "'");
  }
  const bool pattern = field == "pattern";
  const bool symmetric = symmetry == "symmetric";

  // Size line: first non-comment, non-blank line.
  std::vector<std::string_view> size_tokens;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '%') continue;
    size_tokens = detail::split_ws(t);
    break;
  }
  if (size_tokens.size() != 3) throw ParseError(lineno, "malformed size line, expected 'rows cols nnz'");
  const auto rows = detail::parse_number<std::size_t>(size_tokens[0], lineno, "row count");
  const auto cols = detail::parse_number<std::size_t>(size_tokens[1], lineno, "column count");
  const auto declared = detail::parse_number<std::size_t>(size_tokens[2], lineno, "entry count");
  if (rows != cols) throw ParseError(lineno, "matrix is not square");
  if (rows == 0) throw ParseError(lineno, "matrix dimension must be positive");

  std::vector<Entry> entries;
  std::vector<std::size_t> source_line;
  entries.reserve(symmetric ? 2 * declared : declared);
  std::size_t read = 0;
  while (read < declared && std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '%') continue;
    const auto tok = detail::split_ws(t);
    if (tok.size() != (pattern ? 2u : 3u)) throw ParseError(lineno, "wrong number of fields in entry");
    const auto i = detail::parse_number<std::size_t>(tok[0], lineno, "row index");
    const auto j = detail::parse_number<std::size_t>(tok[1], lineno, "column index");
    if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError(lineno, "index out of range");
    const double v = pattern ? 1.0 : detail::parse_number<double>(tok[2], lineno, "value");
    entries.push_back({i - 1, j - 1, v});
    source_line.push_back(lineno);
    if (symmetric && i != j) {
      entries.push_back({j - 1, i - 1, v});
      source_line.push_back(lineno);
    }
    ++read;
  }
  if (read < declared) throw ParseError(lineno, "expected " + std::to_string(declared) + " entries, found " + std::to_string(read));

  // Duplicate detection with line attribution, before handing off to the
  // matrix constructor.
  std::vector<std::size_t> perm(entries.size());
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    return entries[a].row != entries[b].row ? entries[a].row < entries[b].row : entries[a].col < entries[b].col;
  });
  for (std::size_t k = 1; k < perm.size(); ++k) {
    const auto& a = entries[perm[k - 1]];
    const auto& b = entries[perm[k]];
    if (a.row == b.row && a.col == b.col) {
      throw ParseError(std::max(source_line[perm[k - 1]], source_line[perm[k]]),
                       "duplicate entry (" + std::to_string(a.row + 1) + ", " + std::to_string(a.col + 1) + ")");
    }
  }
  return SparseMatrix(rows, std::move(entries));
}

inline SparseMatrix parse_matrix_market(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_matrix_market(in);
}

/// Writes a general real coordinate file. Values use the shortest decimal
/// form that round-trips, so parse(write(m)) == m.
inline void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.dim() << ' ' << m.dim() << ' ' << m.nnz() << '\n';
  char buf[64];
  for (const auto& e : m.entries()) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), e.value);
    out << e.row + 1 << ' ' << e.col + 1 << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf)) << '\n';
  }
}

inline std::string to_matrix_market(const SparseMatrix& m) {
  std::ostringstream out;
  write_matrix_market(out, m);
  return out.str();
}

/// Symmetric banded pattern: each off-diagonal pair within the band is kept
/// with probability `density`; the main diagonal is always present. Values
/// are 1.0.
inline SparseMatrix synth_banded(Index n, Index bw, double density, std::uint64_t seed) {
  if (!(density >= 0.0 && density <= 1.0)) throw ArgumentError("density must lie in [0, 1]");
  if (n == 0) throw ArgumentError("order must be positive");
  if (bw >= n) throw ArgumentError("bandwidth must be smaller than the order");
  Rng rng(seed);
  std::vector<Entry> entries;
  for (Index i = 0; i < n; ++i) {
    entries.push_back({i, i, 1.0});
    for (Index j = i + 1; j <= std::min(n - 1, i + bw); ++j) {
      if (rng.uniform() < density) {
        entries.push_back({i, j, 1.0});
        entries.push_back({j, i, 1.0});
      }
    }
  }
  return SparseMatrix(n, std::move(entries));
}

/// Symmetric 0/1 adjacency matrix of an undirected graph.
inline SparseMatrix from_edge_list(const std::vector<std::pair<Index, Index>>& edges, Index n) {
  std::vector<Entry> entries;
  entries.reserve(2 * edges.size());
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) {
      throw ArgumentError("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") outside order " + std::to_string(n));
    }
    entries.push_back({u, v, 1.0});
    if (u != v) entries.push_back({v, u, 1.0});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  entries.erase(std::unique(entries.begin(), entries.end(),
                            [](const Entry& a, const Entry& b) { return a.row == b.row && a.col == b.col; }),
                entries.end());
  return SparseMatrix(n, std::move(entries));
}

/// Dense (dim+1)^2 cumulative count table: at(i, j) is the number of
/// nonzeros in rows [0, i) x cols [0, j).
class PrefixIndex {
 public:
  static constexpr Index kDefaultMaxDim = 20000;

  explicit PrefixIndex(const SparseMatrix& m, Index max_dim = kDefaultMaxDim) : dim_(m.dim()) {
    if (dim_ > max_dim) {
      throw CapacityError("prefix index for dimension " + std::to_string(dim_) + " exceeds cap " + std::to_string(max_dim));
    }
    if (m.nnz() > std::numeric_limits<std::uint32_t>::max()) throw CapacityError("too many nonzeros for prefix index");
    const Index stride = dim_ + 1;
    cumulative_.assign(stride * stride, 0);
    for (const auto& e : m.entries()) ++cumulative_[(e.row + 1) * stride + (e.col + 1)];
    for (Index i = 1; i <= dim_; ++i) {
      for (Index j = 1; j <= dim_; ++j) {
        cumulative_[i * stride + j] += cumulative_[(i - 1) * stride + j] + cumulative_[i * stride + j - 1] -
                                       cumulative_[(i - 1) * stride + j - 1];
      }
    }
  }

  Index dim() const noexcept { return dim_; }
  std::size_t total() const noexcept { return at(dim_, dim_); }

  std::uint32_t at(Index i, Index j) const noexcept { return cumulative_[i * (dim_ + 1) + j]; }

  /// Nonzeros in rows [r0, r0+h) x cols [c0, c0+w).
  std::size_t count(Index r0, Index c0, Index h, Index w) const {
    if (r0 + h > dim_ || c0 + w > dim_) {
      throw BoundsError("rectangle (" + std::to_string(r0) + ", " + std::to_string(c0) + ", " + std::to_string(h) +
                        ", " + std::to_string(w) + ") outside dimension " + std::to_string(dim_));
    }
    if (h == 0 || w == 0) return 0;
    return at(r0 + h, c0 + w) - at(r0, c0 + w) - at(r0 + h, c0) + at(r0, c0);
  }

 private:
  Index dim_ = 0;
  std::vector<std::uint32_t> cumulative_;
};

inline PrefixIndex build_prefix_index(const SparseMatrix& m, Index max_dim = PrefixIndex::kDefaultMaxDim) {
  return PrefixIndex(m, max_dim);
}

inline std::size_t count_nonzeros(const PrefixIndex& idx, Index r0, Index c0, Index h, Index w) {
  return idx.count(r0, c0, h, w);
}

}  // namespace autogmap
