#include "knh/graph.hpp"

#include "knh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

namespace knh {

WeightedGraph::WeightedGraph(Index n, std::vector<Edge> edges)
    : n_(n), edges_(std::move(edges)) {
  for (auto& e : edges_) {
    if (e.u == e.v) throw ValidationError("graph: self-loop");
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.u < 0 || e.v >= n_) throw ValidationError("graph: node out of range");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw ValidationError("graph: edge weight must be finite and >= 0");
    }
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  });
  auto dup = std::adjacent_find(edges_.begin(), edges_.end(),
                                [](const Edge& a, const Edge& b) {
                                  return a.u == b.u && a.v == b.v;
                                });
  if (dup != edges_.end()) throw ValidationError("graph: duplicate edge");
}

std::vector<std::vector<std::pair<Index, double>>> WeightedGraph::adjacency()
    const {
  std::vector<std::vector<std::pair<Index, double>>> adj(n_);
  for (const auto& e : edges_) {
    adj[e.u].emplace_back(e.v, e.weight);
    adj[e.v].emplace_back(e.u, e.weight);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

std::vector<Index> WeightedGraph::degrees() const {
  std::vector<Index> deg(n_, 0);
  for (const auto& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  return deg;
}

bool WeightedGraph::has_edge(Index u, Index v) const {
  if (u > v) std::swap(u, v);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{u, v, 0.0},
                            [](const Edge& a, const Edge& b) {
                              return std::tie(a.u, a.v) < std::tie(b.u, b.v);
                            });
}

std::vector<Index> WeightedGraph::components() const {
  std::vector<Index> parent(n_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges_) {
    const Index a = find(e.u), b = find(e.v);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<Index> label(n_, -1), out(n_);
  Index next = 0;
  for (Index i = 0; i < n_; ++i) {
    const Index root = find(i);
    if (label[root] < 0) label[root] = next++;
    out[i] = label[root];
  }
  return out;
}

WeightedGraph knn_sparsify(const Matrix& D, Index K, Symmetrization sym) {
  const Index n = D.rows();
  if (D.cols() != n) throw ValidationError("knn_sparsify: D is not square");
  if (K < 1 || K >= n) {
    throw ValidationError("knn_sparsify: K=" + std::to_string(K) +
                          " must lie in [1, N-1] with N=" + std::to_string(n));
  }
  require_finite(D, "distance matrix");
  for (Index i = 0; i < n; ++i) {
    if (D(i, i) != 0.0) throw ValidationError("knn_sparsify: nonzero diagonal");
    for (Index j = i + 1; j < n; ++j) {
      const double tol = 1e-12 * std::max(1.0, std::abs(D(i, j)));
      if (std::abs(D(i, j) - D(j, i)) > tol) {
        throw ValidationError("knn_sparsify: D is not symmetric");
      }
    }
  }

  std::set<std::pair<Index, Index>> selected;
  std::vector<Index> order(n - 1);
  for (Index u = 0; u < n; ++u) {
    order.clear();
    for (Index v = 0; v < n; ++v)
      if (v != u) order.push_back(v);
    std::partial_sort(order.begin(), order.begin() + K, order.end(),
                      [&](Index a, Index b) {
                        return D(u, a) < D(u, b) || (D(u, a) == D(u, b) && a < b);
                      });
    for (Index r = 0; r < K; ++r) selected.emplace(u, order[r]);
  }

  std::vector<Edge> edges;
  for (const auto& [u, v] : selected) {
    const bool reverse = selected.count({v, u}) > 0;
    if (sym == Symmetrization::Mutual && !reverse) continue;
    if (reverse && v < u) continue;  // emitted from the other direction
    edges.push_back({std::min(u, v), std::max(u, v), D(u, v)});
  }
  return WeightedGraph(n, std::move(edges));
}

Matrix baseline_knn_distances(const std::vector<Matrix>& views) {
  if (views.empty()) throw ValidationError("baseline distances need a view");
  const Index n = views.front().rows();
  for (const auto& V : views) {
    if (V.rows() != n) {
      throw ValidationError("views disagree on entity count");
    }
    require_finite(V, "view");
  }
  Matrix D = Matrix::Zero(n, n);
  for (const auto& V : views) {
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) D(i, j) += (V.row(i) - V.row(j)).norm();
  }
  D /= static_cast<double>(views.size());
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) D(j, i) = D(i, j);
  return D;
}

KnhGraph build_knh_graph(const std::vector<ViewMatrix>& views, Index R, Index K,
                         const KnhOptions& opts) {
  if (views.size() != 2 && views.size() != 3) {
    throw ValidationError("KNH graphs need 2 or 3 views, got " +
                          std::to_string(views.size()));
  }
  KnhGraph out;
  if (views.size() == 2) {
    out.projection = cca(views[0], views[1], R, opts.ridge);
  } else {
    out.projection = tcca(views, R, {.ridge = opts.ridge, .seed = opts.seed});
  }
  const auto flats = flats_from_projections(out.projection.projected);
  for (const auto& f : flats) {
    if (f.degenerate()) out.degenerate_entities.push_back(f.entity_id());
  }
  out.distances = pairwise_flat_distances(flats, opts.pair_mode, opts.threads);
  out.graph = knn_sparsify(out.distances, K, opts.symmetrization);
  return out;
}

}  // namespace knh
