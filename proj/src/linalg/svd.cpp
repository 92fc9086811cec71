#include "knh/errors.hpp"
#include "knh/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace knh {

namespace {

constexpr Index kDenseLimit = 512;

// Flip each column of U so its largest-magnitude entry is positive; V's
// matching column follows so U diag(S) V^T is unchanged.
void normalize_signs(Matrix& U, Matrix& V) {
  for (Index c = 0; c < U.cols(); ++c) {
    Index arg = 0;
    U.col(c).cwiseAbs().maxCoeff(&arg);
    if (U(arg, c) < 0) {
      U.col(c) *= -1.0;
      V.col(c) *= -1.0;
    }
  }
}

SvdFactors dense_svd(const Matrix& X, Index r) {
  Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors out;
  out.U = svd.matrixU().leftCols(r);
  out.V = svd.matrixV().leftCols(r);
  const Vector& s = svd.singularValues();
  out.S.assign(s.data(), s.data() + r);
  return out;
}

Matrix orthonormal_basis(const Matrix& Y) {
  Eigen::HouseholderQR<Matrix> qr(Y);
  return qr.householderQ() * Matrix::Identity(Y.rows(), Y.cols());
}

// Randomized range finder followed by subspace iteration until the leading
// r singular values settle.
SvdFactors randomized_svd(const Matrix& X, Index r, const SvdOptions& opts) {
  const Index width =
      std::min<Index>(r + std::max(0, opts.oversampling), std::min(X.rows(), X.cols()));
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix omega(X.cols(), width);
  for (Index c = 0; c < omega.cols(); ++c)
    for (Index i = 0; i < omega.rows(); ++i) omega(i, c) = gauss(rng);

  Matrix Q = orthonormal_basis(X * omega);
  Eigen::BDCSVD<Matrix> small;
  for (int it = 0;; ++it) {
    if (it >= opts.power_iterations) {
      small.compute(Q.transpose() * X, Eigen::ComputeThinU | Eigen::ComputeThinV);
      // X^T u = s v holds by construction; converged once X v = s u too.
      const Matrix resid = X * small.matrixV().leftCols(r) -
                           Q * small.matrixU().leftCols(r) *
                               small.singularValues().head(r).asDiagonal();
      const double scale = std::max(small.singularValues()(0), 1e-300);
      if (resid.cwiseAbs().maxCoeff() <= opts.tol * scale ||
          it >= opts.max_iterations) {
        break;
      }
    }
    Matrix Z = orthonormal_basis(X.transpose() * Q);
    Q = orthonormal_basis(X * Z);
  }

  SvdFactors out;
  out.U = Q * small.matrixU().leftCols(r);
  out.V = small.matrixV().leftCols(r);
  const Vector& s = small.singularValues();
  out.S.assign(s.data(), s.data() + r);
  return out;
}

}  // namespace

Matrix SvdFactors::reconstruct() const {
  Vector s = Eigen::Map<const Vector>(S.data(), static_cast<Index>(S.size()));
  return U * s.asDiagonal() * V.transpose();
}

SvdFactors truncated_svd(const Matrix& X, Index r, const SvdOptions& opts) {
  if (X.size() == 0) throw ValidationError("truncated_svd: empty matrix");
  require_finite(X, "truncated_svd input");
  const Index limit = std::min(X.rows(), X.cols());
  if (r < 1 || r > limit) {
    throw RankError("truncated_svd: rank " + std::to_string(r) +
                    " outside [1, " + std::to_string(limit) + "]");
  }
  SvdMethod method = opts.method;
  if (method == SvdMethod::Auto) {
    method = limit <= kDenseLimit ? SvdMethod::Dense : SvdMethod::Randomized;
  }
  SvdFactors out =
      method == SvdMethod::Dense ? dense_svd(X, r) : randomized_svd(X, r, opts);
  normalize_signs(out.U, out.V);
  return out;
}

}  // namespace knh
