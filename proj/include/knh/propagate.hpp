#pragma once

#include "knh/graph.hpp"
#include "knh/linalg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace knh {

enum class Label : std::int8_t { Negative = 0, Positive = 1, Unknown = -1 };

struct LabelSet {
  std::vector<Label> labels;

  Index size() const { return static_cast<Index>(labels.size()); }
  Index count(Label l) const;
};

struct Beliefs {
  Vector values;  // > 0 means positive
  double residual = 0.0;
  int iterations = 0;
  double homophily = 0.0;  // value actually used
  /// Nodes whose component holds no labelled node; their belief is 0.
  std::vector<Index> unreached;
  std::vector<std::string> warnings;
};

struct FabpOptions {
  double homophily = 0.05;
  int max_iters = 10000;
  double tol = 1e-10;
  /// Use exp(-d^2 / sigma^2) edge weights (sigma = median edge distance)
  /// instead of a binary adjacency.
  bool weighted = false;
};

/// Prior magnitude assigned to labelled nodes.
inline constexpr double kPriorMagnitude = 0.5;

/// Largest homophily for which the linearised system is guaranteed to be
/// diagonally dominant: 1 / (2 + 2 * max weighted degree).
double fabp_homophily_bound(const WeightedGraph& G, bool weighted);

/// Linearised belief propagation. Solves (I + a D - c A) b = phi by
/// conjugate gradients with a = 4h^2/(1-4h^2), c = 2h/(1-4h^2).
Beliefs fabp(const WeightedGraph& G, const LabelSet& priors,
             const FabpOptions& opts = {});

struct Classification {
  LabelSet labels;
  std::vector<bool> tie;  // belief was exactly zero
};

Classification classify(const Beliefs& b);

struct LabelSplit {
  LabelSet priors;
  std::vector<bool> heldout;
};

/// Stratified split: floor(train_frac * class size) (at least 1) nodes of
/// each class keep their label.
LabelSplit split_labels(const LabelSet& truth, double train_frac,
                        std::uint64_t seed);

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  Index tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Scores held-out nodes with a known truth label. Positive is the
/// misinformation class.
Metrics evaluate(const LabelSet& pred, const LabelSet& truth,
                 const std::vector<bool>& heldout);

Metrics metrics_from_counts(Index tp, Index fp, Index fn, Index tn);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single run
};

Summary summarize(const std::vector<double>& values);

}  // namespace knh
