#include "knh/correlate.hpp"
#include "knh/errors.hpp"

#include <cmath>

namespace knh {

ViewMatrix center_columns(const ViewMatrix& V) {
  if (V.entities() < 2) {
    throw ValidationError("center_columns: need at least 2 entities");
  }
  require_finite(V.values, "view " + std::to_string(V.view_id));
  ViewMatrix out = V;
  const Eigen::RowVectorXd mean = V.values.colwise().mean();
  out.values.rowwise() -= mean;
  return out;
}

Matrix variance_matrix(const ViewMatrix& V, double ridge) {
  if (V.entities() < 2) {
    throw ValidationError("variance_matrix: need at least 2 entities");
  }
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
    throw ValidationError("variance_matrix: ridge must be finite and >= 0");
  }
  require_finite(V.values, "view " + std::to_string(V.view_id));
  const double n = static_cast<double>(V.entities());
  Matrix C = V.values.transpose() * V.values / n;
  C.diagonal().array() += ridge;
  return C;
}

double default_ridge(const ViewMatrix& centered) {
  const double n = static_cast<double>(centered.entities());
  return 1e-6 * centered.values.squaredNorm() / n /
         static_cast<double>(centered.dims());
}

Matrix inverse_sqrt(const Matrix& C) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(C);
  Vector inv = eig.eigenvalues().cwiseMax(1e-12).cwiseSqrt().cwiseInverse();
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

double sample_correlation(const Vector& a, const Vector& b) {
  const Vector ac = a.array() - a.mean();
  const Vector bc = b.array() - b.mean();
  const double denom = std::sqrt(ac.squaredNorm() * bc.squaredNorm());
  return denom > 0 ? ac.dot(bc) / denom : 0.0;
}

double CovarianceTensor::at(const std::vector<Index>& idx) const {
  if (idx.size() != dims.size()) {
    throw ValidationError("covariance tensor index has wrong order");
  }
  Index offset = 0, stride = 1;
  for (std::size_t m = 0; m < dims.size(); ++m) {
    if (idx[m] < 0 || idx[m] >= dims[m]) {
      throw ValidationError("covariance tensor index out of range");
    }
    offset += idx[m] * stride;
    stride *= dims[m];
  }
  return values[offset];
}

SparseTensor3 CovarianceTensor::to_sparse() const {
  if (order() != 3) {
    throw ValidationError("covariance tensor: only order 3 converts to a "
                          "three-mode tensor");
  }
  SparseTensor3 T(dims[0], dims[1], dims[2]);
  Index offset = 0;
  for (Index k = 0; k < dims[2]; ++k)
    for (Index j = 0; j < dims[1]; ++j)
      for (Index i = 0; i < dims[0]; ++i) T.add(i, j, k, values[offset++]);
  T.canonicalize();
  return T;
}

CovarianceTensor covariance_tensor(const std::vector<ViewMatrix>& views) {
  if (views.size() < 2) {
    throw ValidationError("covariance_tensor: need at least 2 views");
  }
  const Index n = views.front().entities();
  CovarianceTensor out;
  Index total = 1;
  for (const auto& v : views) {
    if (v.entities() != n) {
      throw ValidationError("covariance_tensor: views disagree on entity "
                            "count");
    }
    require_finite(v.values, "view " + std::to_string(v.view_id));
    out.dims.push_back(v.dims());
    total *= v.dims();
  }
  if (total > kReconstructLimit) {
    throw CapacityError("covariance_tensor: too many entries");
  }
  out.values.assign(total, 0.0);

  // Build each sample's outer product incrementally, mode by mode.
  std::vector<double> outer;
  for (Index s = 0; s < n; ++s) {
    outer.assign(1, 1.0);
    for (const auto& v : views) {
      std::vector<double> next;
      next.reserve(outer.size() * v.dims());
      for (Index j = 0; j < v.dims(); ++j) {
        const double x = v.values(s, j);
        for (double o : outer) next.push_back(o * x);
      }
      outer = std::move(next);
    }
    for (Index t = 0; t < total; ++t) out.values[t] += outer[t];
  }
  for (double& x : out.values) x /= static_cast<double>(n);
  return out;
}

}  // namespace knh
