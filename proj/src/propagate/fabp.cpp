#include "knh/errors.hpp"
#include "knh/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace knh {

namespace {

struct SparseSystem {
  std::vector<std::vector<std::pair<Index, double>>> adj;  // edge weights
  Vector degree;
};

double median_edge_distance(const WeightedGraph& G) {
  std::vector<double> d;
  for (const auto& e : G.edges())
    if (e.weight > 0) d.push_back(e.weight);
  if (d.empty()) return 0.0;
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size() / 2;
  return d.size() % 2 ? d[m] : 0.5 * (d[m - 1] + d[m]);
}

SparseSystem build_system(const WeightedGraph& G, bool weighted) {
  SparseSystem s;
  s.adj = G.adjacency();
  const double sigma = weighted ? median_edge_distance(G) : 0.0;
  s.degree = Vector::Zero(G.nodes());
  for (Index u = 0; u < G.nodes(); ++u) {
    for (auto& [v, w] : s.adj[u]) {
      w = weighted && sigma > 0 ? std::exp(-(w * w) / (sigma * sigma)) : 1.0;
      s.degree(u) += w;
    }
  }
  return s;
}

}  // namespace

Index LabelSet::count(Label l) const {
  return std::count(labels.begin(), labels.end(), l);
}

double fabp_homophily_bound(const WeightedGraph& G, bool weighted) {
  const SparseSystem s = build_system(G, weighted);
  const double max_degree = G.nodes() > 0 ? s.degree.maxCoeff() : 0.0;
  return 1.0 / (2.0 + 2.0 * max_degree);
}

Beliefs fabp(const WeightedGraph& G, const LabelSet& priors,
             const FabpOptions& opts) {
  const Index n = G.nodes();
  if (priors.size() != n) {
    throw ValidationError("fabp: " + std::to_string(priors.size()) +
                          " priors for " + std::to_string(n) + " nodes");
  }
  if (!(opts.homophily > 0.0 && opts.homophily < 0.5)) {
    throw ValidationError("fabp: homophily must lie in (0, 0.5)");
  }
  if (opts.max_iters < 1 || !(opts.tol > 0.0)) {
    throw ValidationError("fabp: max_iters and tol must be positive");
  }

  Beliefs out;
  const SparseSystem sys = build_system(G, opts.weighted);
  const double bound =
      1.0 / (2.0 + 2.0 * (n > 0 ? sys.degree.maxCoeff() : 0.0));
  double h = opts.homophily;
  if (h > 0.9 * bound) {
    h = 0.9 * bound;
    std::ostringstream msg;
    msg << "fabp: homophily " << opts.homophily << " clamped to " << h;
    out.warnings.push_back(msg.str());
  }
  out.homophily = h;
  const double a = 4.0 * h * h / (1.0 - 4.0 * h * h);
  const double c = 2.0 * h / (1.0 - 4.0 * h * h);

  Vector phi = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if (priors.labels[i] == Label::Positive) phi(i) = kPriorMagnitude;
    if (priors.labels[i] == Label::Negative) phi(i) = -kPriorMagnitude;
  }

  const auto comp = G.components();
  std::vector<bool> labelled(n, false);
  for (Index i = 0; i < n; ++i)
    if (phi(i) != 0.0) labelled[comp[i]] = true;
  for (Index i = 0; i < n; ++i)
    if (!labelled[comp[i]]) out.unreached.push_back(i);
  if (!out.unreached.empty()) {
    out.warnings.push_back("fabp: " + std::to_string(out.unreached.size()) +
                           " nodes lie in components without labels");
  }

  auto apply = [&](const Vector& x) {
    Vector y(n);
    for (Index u = 0; u < n; ++u) {
      double s = (1.0 + a * sys.degree(u)) * x(u);
      for (const auto& [v, w] : sys.adj[u]) s -= c * w * x(v);
      y(u) = s;
    }
    return y;
  };

  // Conjugate gradients from b = 0, restarted from the true residual
  // whenever the recursive one claims convergence.
  Vector b = Vector::Zero(n);
  int it = 0;
  while (true) {
    Vector r = phi - apply(b);
    out.residual = r.norm();
    if (out.residual < opts.tol || it >= opts.max_iters) break;
    Vector p = r;
    double rr = r.squaredNorm();
    while (std::sqrt(rr) >= 0.5 * opts.tol && it < opts.max_iters) {
      const Vector Ap = apply(p);
      const double alpha = rr / p.dot(Ap);
      b += alpha * p;
      r -= alpha * Ap;
      const double rr_next = r.squaredNorm();
      p = r + (rr_next / rr) * p;
      rr = rr_next;
      ++it;
    }
  }
  out.iterations = it;
  if (out.residual >= opts.tol) {
    throw ConvergenceError("fabp: residual " + std::to_string(out.residual) +
                               " after " + std::to_string(it) + " iterations",
                           out.residual);
  }
  out.values = std::move(b);
  return out;
}

}  // namespace knh
