#ifndef FORMSIM_GRAPH_HPP
#define FORMSIM_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "formsim/error.hpp"

namespace formsim {

/// Dense square matrix, row-major. Only small orders (n <= ~100) arise here.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t order, double fill = 0.0)
      : order_(order), entries_(order * order, fill) {}

  static SquareMatrix identity(std::size_t order) {
    SquareMatrix m(order);
    for (std::size_t i = 0; i < order; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t order() const noexcept { return order_; }

  double& operator()(std::size_t r, std::size_t c) { return entries_[r * order_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return entries_[r * order_ + c]; }

  const std::vector<double>& entries() const noexcept { return entries_; }

  bool is_symmetric() const {
    for (std::size_t r = 0; r < order_; ++r)
      for (std::size_t c = r + 1; c < order_; ++c)
        if ((*this)(r, c) != (*this)(c, r)) return false;
    return true;
  }

  std::vector<double> operator*(const std::vector<double>& v) const {
    if (v.size() != order_)
      throw Error(ErrorCode::DimensionMismatch, "matrix-vector product: vector length " +
                                                    std::to_string(v.size()) + " != order " +
                                                    std::to_string(order_));
    std::vector<double> out(order_, 0.0);
    for (std::size_t r = 0; r < order_; ++r)
      for (std::size_t c = 0; c < order_; ++c) out[r] += (*this)(r, c) * v[c];
    return out;
  }

  friend SquareMatrix operator-(const SquareMatrix& a, const SquareMatrix& b) {
    if (a.order_ != b.order_) throw Error(ErrorCode::DimensionMismatch, "matrix difference");
    SquareMatrix out(a.order_);
    for (std::size_t k = 0; k < a.entries_.size(); ++k) out.entries_[k] = a.entries_[k] - b.entries_[k];
    return out;
  }

  friend SquareMatrix operator+(const SquareMatrix& a, const SquareMatrix& b) {
    if (a.order_ != b.order_) throw Error(ErrorCode::DimensionMismatch, "matrix sum");
    SquareMatrix out(a.order_);
    for (std::size_t k = 0; k < a.entries_.size(); ++k) out.entries_[k] = a.entries_[k] + b.entries_[k];
    return out;
  }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t order_ = 0;
  std::vector<double> entries_;
};

/// Unordered node pair, 1-based as written by users.
struct EdgeSpec {
  std::size_t i = 0;
  std::size_t j = 0;
};

struct GraphBuild;

/// Undirected simple graph. Nodes are 0-based internally; edges are stored
/// with first < second and sorted.
class Graph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  std::size_t size() const noexcept { return adjacency_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t node) const { return adjacency_.at(node); }
  std::size_t degree(std::size_t node) const { return adjacency_.at(node).size(); }
  bool connected() const noexcept { return connected_; }

  bool has_edge(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    return std::binary_search(edges_.begin(), edges_.end(), Edge{a, b});
  }

  friend bool operator==(const Graph& a, const Graph& b) { return a.edges_ == b.edges_ && a.size() == b.size(); }

 private:
  friend GraphBuild build_graph(std::size_t n, const std::vector<EdgeSpec>& edge_list);

  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
  bool connected_ = true;
};

/// Result of build_graph: the graph plus any non-fatal diagnostics (duplicates).
struct GraphBuild {
  Graph graph;
  std::vector<std::string> warnings;
};

namespace detail {

inline bool traverse_connected(const std::vector<std::vector<std::size_t>>& adjacency) {
  const std::size_t n = adjacency.size();
  if (n <= 1) return true;
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v : adjacency[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n;
}

}  // namespace detail

/// Validates a 1-based edge list and builds the graph. Duplicate edges (in
/// either orientation) are dropped and reported in `warnings`.
inline GraphBuild build_graph(std::size_t n, const std::vector<EdgeSpec>& edge_list) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "graph needs at least one node");
  GraphBuild out;
  Graph& g = out.graph;
  for (const auto& e : edge_list) {
    if (e.i < 1 || e.i > n || e.j < 1 || e.j > n)
      throw Error(ErrorCode::IndexOutOfRange, "edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                                                  ") has an endpoint outside [1.." + std::to_string(n) + "]");
    if (e.i == e.j) throw Error(ErrorCode::SelfLoop, "self-loop on node " + std::to_string(e.i));
    g.edges_.emplace_back(std::min(e.i, e.j) - 1, std::max(e.i, e.j) - 1);
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  const auto unique_end = std::unique(g.edges_.begin(), g.edges_.end());
  const auto duplicates = static_cast<std::size_t>(std::distance(unique_end, g.edges_.end()));
  g.edges_.erase(unique_end, g.edges_.end());
  if (duplicates > 0)
    out.warnings.push_back("dropped " + std::to_string(duplicates) + " duplicate edge(s)");

  g.adjacency_.assign(n, {});
  for (const auto& [a, b] : g.edges_) {
    g.adjacency_[a].push_back(b);
    g.adjacency_[b].push_back(a);
  }
  for (auto& list : g.adjacency_) std::sort(list.begin(), list.end());
  g.connected_ = detail::traverse_connected(g.adjacency_);
  return out;
}

inline bool is_connected(const Graph& g) { return g.connected(); }

inline SquareMatrix degree_matrix(const Graph& g) {
  SquareMatrix d(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) d(i, i) = static_cast<double>(g.degree(i));
  return d;
}

inline SquareMatrix adjacency_matrix(const Graph& g) {
  SquareMatrix a(g.size());
  for (const auto& [i, j] : g.edges()) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return a;
}

inline SquareMatrix laplacian(const Graph& g) { return degree_matrix(g) - adjacency_matrix(g); }

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
inline std::vector<double> symmetric_eigenvalues(SquareMatrix a) {
  const std::size_t n = a.order();
  if (!a.is_symmetric()) throw Error(ErrorCode::InvalidArgument, "symmetric_eigenvalues: matrix is not symmetric");

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(s);
  };
  double scale = 0.0;
  for (double v : a.entries()) scale = std::max(scale, std::abs(v));

  for (int sweep = 0; sweep < 100 && off_norm() > 1e-15 * std::max(scale, 1.0); ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that annihilates a(p,q).
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

inline std::vector<double> laplacian_spectrum(const Graph& g) { return symmetric_eigenvalues(laplacian(g)); }

/// λ₂(L); zero for a single node.
inline double algebraic_connectivity(const Graph& g) {
  const auto spectrum = laplacian_spectrum(g);
  return spectrum.size() < 2 ? 0.0 : spectrum[1];
}

}  // namespace formsim

#endif  // FORMSIM_GRAPH_HPP
