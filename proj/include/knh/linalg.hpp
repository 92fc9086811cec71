#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace knh {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Throws ValidationError naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, const std::string& what);

struct TensorEntry {
  std::int64_t i = 0;
  std::int64_t j = 0;
  std::int64_t k = 0;
  double value = 0.0;
};

/// Three-mode tensor in coordinate storage.
///
/// Entries may be appended in any order with duplicates; canonicalize()
/// sorts them by (k, j, i) and sums duplicate coordinates. Explicit zeros are
/// kept so dense expansions stay dense.
class SparseTensor3 {
 public:
  SparseTensor3() = default;
  SparseTensor3(std::int64_t I, std::int64_t J, std::int64_t K);

  const std::array<std::int64_t, 3>& dims() const noexcept { return dims_; }
  const std::vector<TensorEntry>& entries() const noexcept { return entries_; }
  std::size_t nnz() const noexcept { return entries_.size(); }

  /// Bounds- and finiteness-checked append.
  void add(std::int64_t i, std::int64_t j, std::int64_t k, double value);
  void canonicalize();
  bool canonical() const noexcept { return canonical_; }

  double frobenius_norm() const;
  /// Value at (i, j, k); linear scan unless canonical (then binary search).
  double at(std::int64_t i, std::int64_t j, std::int64_t k) const;

 private:
  std::array<std::int64_t, 3> dims_{0, 0, 0};
  std::vector<TensorEntry> entries_;
  bool canonical_ = true;
};

struct SvdFactors {
  Matrix U;               // N x r
  std::vector<double> S;  // descending, nonnegative
  Matrix V;               // P x r

  Matrix reconstruct() const;
};

enum class SvdMethod {
  Auto,        // dense when min(N, P) <= 512, subspace iteration otherwise
  Dense,
  Randomized,
};

struct SvdOptions {
  SvdMethod method = SvdMethod::Auto;
  int oversampling = 8;
  int power_iterations = 2;
  /// Subspace iteration continues past `power_iterations` until
  /// max |X v_i - s_i u_i| <= tol * s_1 over the leading r triplets.
  double tol = 1e-12;
  int max_iterations = 500;
  std::uint64_t seed = 0x5eed;
};

/// Top-r singular triplets of X. Columns of U are sign-normalised so the
/// largest-magnitude entry is positive; V follows.
SvdFactors truncated_svd(const Matrix& X, Index r, const SvdOptions& opts = {});

struct CpFactors {
  Matrix A;  // I x R, unit columns
  Matrix B;  // J x R, unit columns
  Matrix C;  // K x R, carries the scale
  Index rank = 0;
  double fit = 0.0;
  int sweeps = 0;
  bool converged = false;
  /// Squared residual after each sweep.
  std::vector<double> losses;
  std::vector<std::string> warnings;
};

enum class CpInit { Random, Hosvd };

struct CpOptions {
  int max_sweeps = 100;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  CpInit init = CpInit::Random;
};

/// Rank-R CP decomposition by alternating least squares.
CpFactors cp_als(const SparseTensor3& T, Index R, const CpOptions& opts);

/// Fit of a CP model against T: 1 - ||T - model||_F / ||T||_F.
double cp_fit(const SparseTensor3& T, const Matrix& A, const Matrix& B,
              const Matrix& C);

/// Dense expansion of a CP model (all I*J*K coordinates, zeros dropped).
/// Refuses models with more than 10^6 coordinates.
SparseTensor3 cp_reconstruct(const CpFactors& F);

inline constexpr std::int64_t kReconstructLimit = 1'000'000;

}  // namespace knh
