#pragma once

#include "knh/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace knh {

/// One view of the entity set: row i is entity i's d_m-dimensional
/// representation.
struct ViewMatrix {
  Matrix values;
  int view_id = 0;

  Index entities() const { return values.rows(); }
  Index dims() const { return values.cols(); }
};

/// Per-view canonical directions and the entities projected onto them.
struct CanonicalProjection {
  std::vector<Matrix> directions;  // d_m x R
  std::vector<Matrix> projected;   // N x R
  std::vector<double> correlations;
  std::vector<int> view_ids;
  std::vector<double> ridges;
  std::vector<std::string> warnings;

  Index rank() const { return correlations.size(); }
};

/// Dense M-way array stored with the first index varying fastest.
struct CovarianceTensor {
  std::vector<Index> dims;
  std::vector<double> values;

  Index order() const { return dims.size(); }
  double at(const std::vector<Index>& idx) const;
  /// Only for order 3.
  SparseTensor3 to_sparse() const;
};

ViewMatrix center_columns(const ViewMatrix& V);

/// (1/N) V^T V + ridge I for an already-centred view.
Matrix variance_matrix(const ViewMatrix& V, double ridge);

/// Entry (j_1..j_M) = (1/N) sum_n prod_m V_m(n, j_m). Views must be centred
/// by the caller.
CovarianceTensor covariance_tensor(const std::vector<ViewMatrix>& views);

/// 1e-6 * trace(C_pp) / d_m of the centred view.
double default_ridge(const ViewMatrix& centered);

/// Symmetric inverse square root; eigenvalues clamped at 1e-12.
Matrix inverse_sqrt(const Matrix& C);

/// Two-view CCA on ridge-regularised covariances. A missing ridge uses
/// default_ridge per view.
CanonicalProjection cca(const ViewMatrix& V1, const ViewMatrix& V2, Index R,
                        std::optional<double> ridge = std::nullopt);

struct TccaOptions {
  std::optional<double> ridge;
  std::uint64_t seed = 0;
  int max_sweeps = 500;
  double tol = 1e-10;
};

/// Tensor CCA for two or three views: whiten each view, decompose the
/// whitened covariance tensor at rank R, and map the factors back.
CanonicalProjection tcca(const std::vector<ViewMatrix>& views, Index R,
                         const TccaOptions& opts = {});

/// Pearson correlation of two equally sized columns.
double sample_correlation(const Vector& a, const Vector& b);

}  // namespace knh
