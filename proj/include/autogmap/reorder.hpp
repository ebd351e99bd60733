#pragma once

// Cuthill-McKee reordering and the permutation transforms
//   A' = P A P^T,   x' = P x,   y = P^T y'.

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autogmap/error.hpp"
#include "autogmap/matrix.hpp"

namespace autogmap {

/// Bijection old index -> new index.
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<Index> order) : order_(std::move(order)) {
    std::vector<bool> seen(order_.size(), false);
    for (Index v : order_) {
      if (v >= order_.size() || seen[v]) throw ArgumentError("permutation is not a bijection on [0, " + std::to_string(order_.size()) + ")");
      seen[v] = true;
    }
  }

  static Permutation identity(Index n) {
    std::vector<Index> order(n);
    for (Index i = 0; i < n; ++i) order[i] = i;
    return Permutation(std::move(order));
  }

  /// Builds the permutation from a sequence listing old indices in their new
  /// positions (new -> old).
  static Permutation from_sequence(std::span<const Index> sequence) {
    std::vector<Index> order(sequence.size());
    for (Index pos = 0; pos < sequence.size(); ++pos) {
      if (sequence[pos] >= sequence.size()) throw ArgumentError("sequence entry out of range");
      order[sequence[pos]] = pos;
    }
    return Permutation(std::move(order));
  }

  Index size() const noexcept { return order_.size(); }
  Index operator[](Index old_index) const { return order_[old_index]; }
  const std::vector<Index>& order() const noexcept { return order_; }

  Permutation inverse() const {
    std::vector<Index> inv(order_.size());
    for (Index i = 0; i < order_.size(); ++i) inv[order_[i]] = i;
    return Permutation(std::move(inv));
  }

  /// (this ∘ other)[i] = this[other[i]]
  Permutation compose(const Permutation& other) const {
    if (other.size() != size()) throw ArgumentError("permutation size mismatch");
    std::vector<Index> out(size());
    for (Index i = 0; i < size(); ++i) out[i] = order_[other[i]];
    return Permutation(std::move(out));
  }

  bool is_identity() const {
    for (Index i = 0; i < order_.size(); ++i) {
      if (order_[i] != i) return false;
    }
    return true;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<Index> order_;
};

inline nlohmann::json to_json(const Permutation& p) { return nlohmann::json{{"order", p.order()}}; }

inline Permutation permutation_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("order") || !j["order"].is_array()) throw ArgumentError("permutation JSON must contain an integer array 'order'");
  return Permutation(j["order"].get<std::vector<Index>>());
}

/// max |i - j| over nonzeros.
inline Index bandwidth(const SparseMatrix& m) {
  Index bw = 0;
  for (const auto& e : m.entries()) bw = std::max(bw, e.row > e.col ? e.row - e.col : e.col - e.row);
  return bw;
}

/// Cuthill-McKee ordering of a symmetric pattern. Components are visited in
/// order of their smallest vertex; each starts from its minimum-degree vertex
/// (lowest index on ties) and expands neighbours by (degree, index). With
/// `reverse` the whole sequence is reversed (RCM).
inline Permutation rcm_order(const SparseMatrix& m, bool reverse = true) {
  if (!m.has_symmetric_pattern()) throw PreconditionError("Cuthill-McKee ordering requires a symmetric pattern");
  const Index n = m.dim();
  std::vector<std::vector<Index>> adj(n);
  for (const auto& e : m.entries()) {
    if (e.row != e.col) adj[e.row].push_back(e.col);
  }
  std::vector<Index> degree(n);
  for (Index v = 0; v < n; ++v) degree[v] = adj[v].size();
  const auto by_degree = [&](Index a, Index b) { return degree[a] != degree[b] ? degree[a] < degree[b] : a < b; };
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end(), by_degree);

  // Component labels, discovered in order of smallest vertex.
  std::vector<Index> component(n, n);
  std::vector<Index> roots;
  for (Index s = 0; s < n; ++s) {
    if (component[s] != n) continue;
    const Index label = roots.size();
    Index best = s;
    std::vector<Index> stack{s};
    component[s] = label;
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      if (by_degree(v, best)) best = v;
      for (Index w : adj[v]) {
        if (component[w] == n) {
          component[w] = label;
          stack.push_back(w);
        }
      }
    }
    roots.push_back(best);
  }

  std::vector<Index> sequence;
  sequence.reserve(n);
  std::vector<bool> visited(n, false);
  for (Index root : roots) {
    std::deque<Index> queue{root};
    visited[root] = true;
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop_front();
      sequence.push_back(v);
      for (Index w : adj[v]) {
        if (!visited[w]) {
          visited[w] = true;
          queue.push_back(w);
        }
      }
    }
  }
  if (reverse) std::reverse(sequence.begin(), sequence.end());
  return Permutation::from_sequence(sequence);
}

/// Entry (i, j, v) moves to (p[i], p[j], v).
inline SparseMatrix permute_matrix(const SparseMatrix& m, const Permutation& p) {
  if (p.size() != m.dim()) throw ArgumentError("permutation size " + std::to_string(p.size()) + " does not match dimension " + std::to_string(m.dim()));
  std::vector<Entry> entries;
  entries.reserve(m.nnz());
  for (const auto& e : m.entries()) entries.push_back({p[e.row], p[e.col], e.value});
  return SparseMatrix(m.dim(), std::move(entries));
}

/// x'[p[i]] = x[i]
inline std::vector<double> permute_vector(std::span<const double> x, const Permutation& p) {
  if (x.size() != p.size()) throw ArgumentError("vector length does not match permutation size");
  std::vector<double> out(x.size());
  for (Index i = 0; i < x.size(); ++i) out[p[i]] = x[i];
  return out;
}

/// y[i] = y'[p[i]]
inline std::vector<double> inverse_permute_vector(std::span<const double> y, const Permutation& p) {
  if (y.size() != p.size()) throw ArgumentError("vector length does not match permutation size");
  std::vector<double> out(y.size());
  for (Index i = 0; i < y.size(); ++i) out[i] = y[p[i]];
  return out;
}

}  // namespace autogmap
