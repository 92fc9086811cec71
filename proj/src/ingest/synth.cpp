#include "knh/errors.hpp"
#include "knh/ingest.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace knh {

namespace {

Matrix gaussian(std::mt19937_64& rng, Index rows, Index cols, double sigma) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = sigma * g(rng);
  return m;
}

// Cluster centres as rows. With enough latent dimensions the centres are
// orthogonal, so every pair sits exactly `separation` apart.
Matrix cluster_centres(std::mt19937_64& rng, const SynthSpec& spec) {
  const double scale = spec.separation / std::sqrt(2.0);
  Matrix draw = gaussian(rng, spec.latent_dim, spec.n_clusters, 1.0);
  if (spec.n_clusters <= spec.latent_dim) {
    Eigen::HouseholderQR<Matrix> qr(draw);
    Matrix Q = qr.householderQ() * Matrix::Identity(spec.latent_dim, spec.n_clusters);
    return scale * Q.transpose();
  }
  return scale / std::sqrt(static_cast<double>(spec.latent_dim)) * draw.transpose();
}

}  // namespace

SynthData synth_views(const SynthSpec& spec) {
  if (spec.n_clusters < 2) throw ValidationError("synth: need at least 2 clusters");
  if (spec.latent_dim < 1 || spec.view_dims.empty()) {
    throw ValidationError("synth: dimensions must be at least 1");
  }
  for (Index d : spec.view_dims)
    if (d < 1) throw ValidationError("synth: view dimensions must be at least 1");
  if (spec.n_entities < spec.n_clusters) {
    throw ValidationError("synth: fewer entities than clusters");
  }
  if (!(spec.noise_sigma >= 0) || !(spec.cluster_spread >= 0) ||
      !(spec.separation > 0)) {
    throw ValidationError("synth: noise, spread and separation must be "
                          "nonnegative (separation positive)");
  }

  std::mt19937_64 rng(spec.seed);
  const Matrix centres = cluster_centres(rng, spec);

  SynthData out;
  out.cluster.resize(spec.n_entities);
  out.truth.labels.resize(spec.n_entities);
  Matrix latent = gaussian(rng, spec.n_entities, spec.latent_dim, spec.cluster_spread);
  for (Index i = 0; i < spec.n_entities; ++i) {
    const Index c = i % spec.n_clusters;
    out.cluster[i] = c;
    out.truth.labels[i] = c % 2 ? Label::Positive : Label::Negative;
    latent.row(i) += centres.row(c);
  }

  const double map_scale = 1.0 / std::sqrt(static_cast<double>(spec.latent_dim));
  for (std::size_t m = 0; m < spec.view_dims.size(); ++m) {
    const Matrix map = gaussian(rng, spec.latent_dim, spec.view_dims[m], map_scale);
    Matrix values = latent * map;
    if (spec.noise_sigma > 0) {
      values += gaussian(rng, spec.n_entities, spec.view_dims[m], spec.noise_sigma);
    }
    out.views.push_back({std::move(values), static_cast<int>(m)});
  }
  return out;
}

SynthData synth_two_view(const SynthSpec& spec) {
  if (spec.view_dims.size() != 2) {
    throw ValidationError("synth_two_view: need exactly 2 view dimensions");
  }
  return synth_views(spec);
}

double one_nn_accuracy(const Matrix& X, const LabelSet& truth) {
  if (X.rows() != truth.size()) {
    throw ValidationError("one_nn_accuracy: size mismatch");
  }
  Index correct = 0, total = 0;
  for (Index i = 0; i < X.rows(); ++i) {
    if (truth.labels[i] == Label::Unknown) continue;
    double best = std::numeric_limits<double>::infinity();
    Index arg = -1;
    for (Index j = 0; j < X.rows(); ++j) {
      if (j == i || truth.labels[j] == Label::Unknown) continue;
      const double d = (X.row(i) - X.row(j)).squaredNorm();
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    if (arg < 0) continue;
    ++total;
    if (truth.labels[arg] == truth.labels[i]) ++correct;
  }
  if (total == 0) throw ValidationError("one_nn_accuracy: no labelled pairs");
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace knh
