#include "knh/errors.hpp"
#include "knh/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <utility>

namespace knh {

namespace {

enum Mode { kModeI = 0, kModeJ = 1, kModeK = 2 };

// Matricized tensor times Khatri-Rao product for one mode. Accumulates over
// the canonical entry order, so results are bitwise reproducible.
Matrix mttkrp(const SparseTensor3& T, Mode mode, const Matrix& A,
              const Matrix& B, const Matrix& C) {
  const Index R = A.cols();
  const auto rows = T.dims()[mode];
  Matrix M = Matrix::Zero(rows, R);
  for (const auto& e : T.entries()) {
    switch (mode) {
      case kModeI:
        M.row(e.i) += e.value * B.row(e.j).cwiseProduct(C.row(e.k));
        break;
      case kModeJ:
        M.row(e.j) += e.value * A.row(e.i).cwiseProduct(C.row(e.k));
        break;
      case kModeK:
        M.row(e.k) += e.value * A.row(e.i).cwiseProduct(B.row(e.j));
        break;
    }
  }
  return M;
}

// Least-squares solve of F * G = M for symmetric PSD G (minimum-norm when G is
// singular).
Matrix solve_normal(const Matrix& M, const Matrix& G) {
  return G.completeOrthogonalDecomposition().solve(M.transpose()).transpose();
}

void normalize_columns(Matrix& F) {
  for (Index c = 0; c < F.cols(); ++c) {
    const double n = F.col(c).norm();
    if (n > 0) F.col(c) /= n;
  }
}

double model_norm_sq(const Matrix& A, const Matrix& B, const Matrix& C) {
  Matrix G = (A.transpose() * A)
                 .cwiseProduct(B.transpose() * B)
                 .cwiseProduct(C.transpose() * C);
  return G.sum();
}

double inner_with_model(const SparseTensor3& T, const Matrix& A,
                        const Matrix& B, const Matrix& C) {
  double s = 0.0;
  for (const auto& e : T.entries()) {
    s += e.value * A.row(e.i).cwiseProduct(B.row(e.j)).dot(C.row(e.k));
  }
  return s;
}

double residual_sq(const SparseTensor3& T, double norm_sq, const Matrix& A,
                   const Matrix& B, const Matrix& C) {
  const double r =
      norm_sq - 2.0 * inner_with_model(T, A, B, C) + model_norm_sq(A, B, C);
  return std::max(r, 0.0);
}

Matrix random_factor(std::mt19937_64& rng, std::int64_t rows, Index R) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix F(rows, R);
  for (Index c = 0; c < R; ++c)
    for (std::int64_t i = 0; i < rows; ++i) F(i, c) = unif(rng);
  return F;
}

// Leading left singular vectors of the mode unfolding, via its Gram matrix
// accumulated over fibres. Columns past the unfolding rank are random.
Matrix hosvd_factor(const SparseTensor3& T, Mode mode, Index R,
                    std::mt19937_64& rng) {
  const auto rows = T.dims()[mode];
  std::map<std::pair<std::int64_t, std::int64_t>,
           std::vector<std::pair<std::int64_t, double>>>
      fibres;
  for (const auto& e : T.entries()) {
    switch (mode) {
      case kModeI: fibres[{e.j, e.k}].push_back({e.i, e.value}); break;
      case kModeJ: fibres[{e.i, e.k}].push_back({e.j, e.value}); break;
      case kModeK: fibres[{e.i, e.j}].push_back({e.k, e.value}); break;
    }
  }
  Matrix gram = Matrix::Zero(rows, rows);
  for (const auto& [_, fibre] : fibres) {
    for (const auto& [a, va] : fibre)
      for (const auto& [b, vb] : fibre) gram(a, b) += va * vb;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  Matrix F = random_factor(rng, rows, R);
  const Index take = std::min<Index>(R, rows);
  for (Index c = 0; c < take; ++c) {
    F.col(c) = eig.eigenvectors().col(rows - 1 - c);
  }
  return F;
}

void normalize_signs(Matrix& A, Matrix& B, Matrix& C) {
  for (Matrix* F : {&A, &B}) {
    for (Index c = 0; c < F->cols(); ++c) {
      Index arg = 0;
      F->col(c).cwiseAbs().maxCoeff(&arg);
      if ((*F)(arg, c) < 0) {
        F->col(c) *= -1.0;
        C.col(c) *= -1.0;
      }
    }
  }
}

}  // namespace

double cp_fit(const SparseTensor3& T, const Matrix& A, const Matrix& B,
              const Matrix& C) {
  SparseTensor3 copy = T;
  copy.canonicalize();
  const double norm = copy.frobenius_norm();
  if (norm == 0.0) throw ValidationError("cp_fit: all-zero tensor");
  return 1.0 - std::sqrt(residual_sq(copy, norm * norm, A, B, C)) / norm;
}

CpFactors cp_als(const SparseTensor3& input, Index R, const CpOptions& opts) {
  if (R < 1) throw RankError("cp_als: rank must be at least 1");
  if (opts.max_sweeps < 1) {
    throw ValidationError("cp_als: max_sweeps must be at least 1");
  }
  SparseTensor3 T = input;
  T.canonicalize();
  const double norm = T.frobenius_norm();
  if (norm == 0.0) throw ValidationError("cp_als: all-zero tensor");
  const double norm_sq = norm * norm;
  const auto& dims = T.dims();

  CpFactors out;
  out.rank = R;
  const auto smallest = *std::min_element(dims.begin(), dims.end());
  if (R > smallest * smallest) {
    out.warnings.push_back("cp_als: rank " + std::to_string(R) +
                           " exceeds min(I,J,K)^2; model is over-factored");
  }

  std::mt19937_64 rng(opts.seed);
  Matrix A, B, C;
  if (opts.init == CpInit::Hosvd) {
    A = hosvd_factor(T, kModeI, R, rng);
    B = hosvd_factor(T, kModeJ, R, rng);
    C = hosvd_factor(T, kModeK, R, rng);
  } else {
    A = random_factor(rng, dims[0], R);
    B = random_factor(rng, dims[1], R);
    C = random_factor(rng, dims[2], R);
  }

  double previous_fit = 0.0;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    A = solve_normal(mttkrp(T, kModeI, A, B, C),
                     (B.transpose() * B).cwiseProduct(C.transpose() * C));
    normalize_columns(A);
    B = solve_normal(mttkrp(T, kModeJ, A, B, C),
                     (A.transpose() * A).cwiseProduct(C.transpose() * C));
    normalize_columns(B);
    C = solve_normal(mttkrp(T, kModeK, A, B, C),
                     (A.transpose() * A).cwiseProduct(B.transpose() * B));

    const double loss = residual_sq(T, norm_sq, A, B, C);
    out.losses.push_back(loss);
    const double fit = 1.0 - std::sqrt(loss) / norm;
    out.sweeps = sweep + 1;
    if (sweep > 0 && std::abs(fit - previous_fit) < opts.tol) {
      out.converged = true;
      previous_fit = fit;
      break;
    }
    previous_fit = fit;
  }

  normalize_signs(A, B, C);
  out.A = std::move(A);
  out.B = std::move(B);
  out.C = std::move(C);
  out.fit = previous_fit;
  return out;
}

SparseTensor3 cp_reconstruct(const CpFactors& F) {
  const Index R = F.A.cols();
  if (F.B.cols() != R || F.C.cols() != R) {
    throw ValidationError("cp_reconstruct: factor column counts differ");
  }
  const std::int64_t I = F.A.rows(), J = F.B.rows(), K = F.C.rows();
  if (I < 1 || J < 1 || K < 1) {
    throw ValidationError("cp_reconstruct: empty factor");
  }
  if (I > kReconstructLimit / J || I * J > kReconstructLimit / K) {
    throw CapacityError("cp_reconstruct: " + std::to_string(I) + "x" +
                        std::to_string(J) + "x" + std::to_string(K) +
                        " exceeds the dense expansion limit");
  }
  SparseTensor3 T(I, J, K);
  for (std::int64_t k = 0; k < K; ++k)
    for (std::int64_t j = 0; j < J; ++j) {
      const Vector bc = F.B.row(j).cwiseProduct(F.C.row(k)).transpose();
      for (std::int64_t i = 0; i < I; ++i) T.add(i, j, k, F.A.row(i).dot(bc));
    }
  T.canonicalize();
  return T;
}

}  // namespace knh
