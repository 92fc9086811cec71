#include "knh/correlate.hpp"
#include "knh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace knh {

namespace {

struct Whitened {
  ViewMatrix centered;
  double ridge = 0.0;
  Matrix whitener;  // (C_pp + ridge I)^{-1/2}
};

Whitened whiten(const ViewMatrix& V, std::optional<double> ridge) {
  Whitened w;
  w.centered = center_columns(V);
  w.ridge = ridge ? *ridge : default_ridge(w.centered);
  if (!(w.ridge >= 0.0) || !std::isfinite(w.ridge)) {
    throw ValidationError("ridge must be finite and >= 0");
  }
  const Matrix C = variance_matrix(w.centered, w.ridge);
  if (w.ridge == 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(C, Eigen::EigenvaluesOnly);
    const double top = std::max(eig.eigenvalues().maxCoeff(), 0.0);
    if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(top, 1.0)) {
      throw SingularityError("view " + std::to_string(V.view_id) +
                             " has a rank-deficient covariance; use a "
                             "positive ridge");
    }
  }
  w.whitener = inverse_sqrt(C);
  return w;
}

void check_views(const std::vector<ViewMatrix>& views, Index R) {
  const Index n = views.front().entities();
  Index smallest = views.front().dims();
  for (const auto& v : views) {
    if (v.entities() != n) {
      throw ValidationError("views disagree on entity count");
    }
    smallest = std::min(smallest, v.dims());
  }
  if (R < 1 || R > smallest) {
    throw RankError("canonical rank " + std::to_string(R) + " outside [1, " +
                    std::to_string(smallest) + "]");
  }
}

// Regularised correlation h_p^T C_pq h_q between two projected columns; the
// regularised variances are 1 by construction.
double projected_correlation(const Matrix& P, const Matrix& Q, Index c) {
  return P.col(c).dot(Q.col(c)) / static_cast<double>(P.rows());
}

}  // namespace

CanonicalProjection cca(const ViewMatrix& V1, const ViewMatrix& V2, Index R,
                        std::optional<double> ridge) {
  check_views({V1, V2}, R);
  const Whitened w1 = whiten(V1, ridge);
  const Whitened w2 = whiten(V2, ridge);
  const double n = static_cast<double>(V1.entities());
  const Matrix cross = w1.centered.values.transpose() * w2.centered.values / n;
  const SvdFactors svd =
      truncated_svd(w1.whitener * cross * w2.whitener, R, {.method = SvdMethod::Dense});

  CanonicalProjection out;
  out.directions = {w1.whitener * svd.U, w2.whitener * svd.V};
  out.projected = {w1.centered.values * out.directions[0],
                   w2.centered.values * out.directions[1]};
  for (double s : svd.S) out.correlations.push_back(std::clamp(s, 0.0, 1.0));
  out.view_ids = {V1.view_id, V2.view_id};
  out.ridges = {w1.ridge, w2.ridge};
  return out;
}

CanonicalProjection tcca(const std::vector<ViewMatrix>& views, Index R,
                         const TccaOptions& opts) {
  if (views.size() < 2 || views.size() > 3) {
    throw ValidationError("tcca: supports 2 or 3 views, got " +
                          std::to_string(views.size()));
  }
  check_views(views, R);

  std::vector<Whitened> w;
  std::vector<ViewMatrix> whitened_views;
  for (const auto& v : views) {
    w.push_back(whiten(v, opts.ridge));
    whitened_views.push_back(
        {w.back().centered.values * w.back().whitener, v.view_id});
  }
  const CovarianceTensor cov = covariance_tensor(whitened_views);

  CanonicalProjection out;
  std::vector<Matrix> unit_factors;
  if (views.size() == 2) {
    // A two-way covariance tensor is a matrix; its best rank-R CP model is
    // the truncated SVD.
    Matrix C = Eigen::Map<const Matrix>(cov.values.data(), cov.dims[0],
                                        cov.dims[1]);
    const SvdFactors svd = truncated_svd(C, R, {.method = SvdMethod::Dense});
    unit_factors = {svd.U, svd.V};
  } else {
    CpOptions cp{.max_sweeps = opts.max_sweeps, .tol = opts.tol,
                 .seed = opts.seed};
    CpFactors f = cp_als(cov.to_sparse(), R, cp);
    for (const auto& msg : f.warnings) out.warnings.push_back(msg);
    if (!f.converged) {
      out.warnings.push_back("tcca: CP did not converge within " +
                             std::to_string(opts.max_sweeps) + " sweeps");
    }
    Matrix C = f.C;
    for (Index c = 0; c < C.cols(); ++c) {
      const double norm = C.col(c).norm();
      if (norm > 0) C.col(c) /= norm;
    }
    unit_factors = {f.A, f.B, C};
  }

  const std::size_t M = views.size();
  std::vector<Matrix> directions(M), projected(M);
  for (std::size_t p = 0; p < M; ++p) {
    directions[p] = w[p].whitener * unit_factors[p];
    projected[p] = w[p].centered.values * directions[p];
  }
  // Orient every view's component to correlate positively with view 0.
  for (std::size_t p = 1; p < M; ++p) {
    for (Index c = 0; c < R; ++c) {
      if (projected_correlation(projected[0], projected[p], c) < 0) {
        directions[p].col(c) *= -1.0;
        projected[p].col(c) *= -1.0;
      }
    }
  }

  std::vector<double> corr(R, 0.0);
  for (Index c = 0; c < R; ++c) {
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t p = 0; p < M; ++p)
      for (std::size_t q = p + 1; q < M; ++q, ++pairs)
        sum += projected_correlation(projected[p], projected[q], c);
    corr[c] = std::clamp(sum / pairs, -1.0, 1.0);
  }
  std::vector<Index> order(R);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return corr[a] > corr[b]; });

  for (std::size_t p = 0; p < M; ++p) {
    Matrix H(directions[p].rows(), R), P(projected[p].rows(), R);
    for (Index c = 0; c < R; ++c) {
      H.col(c) = directions[p].col(order[c]);
      P.col(c) = projected[p].col(order[c]);
    }
    out.directions.push_back(std::move(H));
    out.projected.push_back(std::move(P));
    out.view_ids.push_back(views[p].view_id);
    out.ridges.push_back(w[p].ridge);
  }
  for (Index c = 0; c < R; ++c) out.correlations.push_back(corr[order[c]]);
  return out;
}

}  // namespace knh
