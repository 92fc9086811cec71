#pragma once

#include "knh/correlate.hpp"
#include "knh/flats.hpp"
#include "knh/linalg.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace knh {

struct Edge {
  Index u = 0;
  Index v = 0;
  double weight = 0.0;  // distance

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected graph; each edge is stored once with u < v, sorted by (u, v).
class WeightedGraph {
 public:
  WeightedGraph() = default;
  WeightedGraph(Index n, std::vector<Edge> edges);

  Index nodes() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::vector<std::vector<std::pair<Index, double>>> adjacency() const;
  std::vector<Index> degrees() const;
  bool has_edge(Index u, Index v) const;
  /// Component id per node, numbered in order of first appearance.
  std::vector<Index> components() const;

 private:
  Index n_ = 0;
  std::vector<Edge> edges_;
};

enum class Symmetrization {
  Union,   // keep an edge if either endpoint selected the other
  Mutual,  // keep it only if both did
};

/// K nearest neighbours of every row of D (ties to the lower index),
/// symmetrised. Weights are the D entries.
WeightedGraph knn_sparsify(const Matrix& D, Index K,
                           Symmetrization sym = Symmetrization::Union);

/// D(i, j) = mean over views of ||V_m(i,:) - V_m(j,:)||.
Matrix baseline_knn_distances(const std::vector<Matrix>& views);

struct KnhOptions {
  std::optional<double> ridge;
  std::uint64_t seed = 0;
  PairMode pair_mode = PairMode::OneWay;
  Symmetrization symmetrization = Symmetrization::Union;
  unsigned threads = 1;
};

struct KnhGraph {
  WeightedGraph graph;
  Matrix distances;
  CanonicalProjection projection;
  std::vector<Index> degenerate_entities;
};

/// CCA (two views) or TCCA (three views) into R dimensions, one flat per
/// entity, pairwise flat distances, then K-nearest sparsification.
KnhGraph build_knh_graph(const std::vector<ViewMatrix>& views, Index R, Index K,
                         const KnhOptions& opts = {});

}  // namespace knh
