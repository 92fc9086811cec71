#include "knh/correlate.hpp"
#include "knh/errors.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace knh;

namespace {

ViewMatrix view(Matrix m, int id = 0) { return {std::move(m), id}; }

// Two views sharing `shared` latent columns plus independent noise.
std::pair<ViewMatrix, ViewMatrix> correlated_views(Index n, Index d1, Index d2,
                                                   double noise, std::uint64_t seed) {
  const Matrix z = oracle::random_matrix(n, 2, seed);
  Matrix X = z * oracle::random_matrix(2, d1, seed + 1) +
             noise * oracle::random_matrix(n, d1, seed + 2);
  Matrix Y = z * oracle::random_matrix(2, d2, seed + 3) +
             noise * oracle::random_matrix(n, d2, seed + 4);
  return {view(X, 0), view(Y, 1)};
}

Matrix loop_covariance(const Matrix& A, const Matrix& B) {
  Matrix C = Matrix::Zero(A.cols(), B.cols());
  for (Index a = 0; a < A.cols(); ++a)
    for (Index b = 0; b < B.cols(); ++b) {
      double s = 0.0;
      for (Index n = 0; n < A.rows(); ++n) s += A(n, a) * B(n, b);
      C(a, b) = s / static_cast<double>(A.rows());
    }
  return C;
}

double regularized_correlation(const Matrix& Cxx, const Matrix& Cyy,
                               const Matrix& Cxy, const Vector& hx, const Vector& hy) {
  return hx.dot(Cxy * hy) / std::sqrt(hx.dot(Cxx * hx) * hy.dot(Cyy * hy));
}

}  // namespace

TEST_CASE("center_columns") {
  Matrix m(3, 1);
  m << 1, 2, 3;
  const ViewMatrix c = center_columns(view(m));
  CHECK(c.values(0, 0) == -1.0);
  CHECK(c.values(1, 0) == 0.0);
  CHECK(c.values(2, 0) == 1.0);

  const ViewMatrix r = center_columns(view(oracle::random_matrix(10, 3, 1)));
  CHECK(r.values.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  const ViewMatrix again = center_columns(r);
  CHECK((again.values - r.values).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(center_columns(view(Matrix::Ones(1, 3))), ValidationError);
}

TEST_CASE("variance_matrix") {
  const Index n = 12;
  const Matrix Q = oracle::random_orthogonal(n, 5).leftCols(3) * std::sqrt(double(n));
  const Matrix C = variance_matrix(view(Q), 0.25);
  CHECK((C - 1.25 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

  Matrix dup = center_columns(view(oracle::random_matrix(8, 2, 6))).values;
  Matrix withdup(8, 3);
  withdup << dup, dup.col(0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(variance_matrix(view(withdup), 0.0));
  CHECK(eig.eigenvalues().minCoeff() < 1e-12);

  const Matrix V = center_columns(view(oracle::random_matrix(8, 3, 7))).values;
  const Matrix oracle_c = loop_covariance(V, V) + 0.1 * Matrix::Identity(3, 3);
  CHECK((variance_matrix(view(V), 0.1) - oracle_c).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("covariance_tensor") {
  SUBCASE("two views give the cross-covariance matrix") {
    const Matrix A = oracle::random_matrix(9, 3, 1), B = oracle::random_matrix(9, 2, 2);
    const CovarianceTensor T = covariance_tensor({view(A), view(B)});
    const Matrix C = loop_covariance(A, B);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 2; ++j) CHECK(T.at({i, j}) == C(i, j));
  }
  SUBCASE("single sample is an outer product") {
    const Matrix a = oracle::random_matrix(1, 2, 3), b = oracle::random_matrix(1, 3, 4),
                 c = oracle::random_matrix(1, 2, 5);
    const CovarianceTensor T = covariance_tensor({view(a), view(b), view(c)});
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 3; ++j)
        for (Index k = 0; k < 2; ++k)
          CHECK(T.at({i, j, k}) == doctest::Approx(a(0, i) * b(0, j) * c(0, k)).epsilon(1e-15));
  }
  SUBCASE("three views match the quadruple loop") {
    const Matrix A = oracle::random_matrix(4, 2, 6), B = oracle::random_matrix(4, 2, 7),
                 C = oracle::random_matrix(4, 2, 8);
    const CovarianceTensor T = covariance_tensor({view(A), view(B), view(C)});
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 2; ++j)
        for (Index k = 0; k < 2; ++k) {
          double s = 0.0;
          for (Index n = 0; n < 4; ++n) s += A(n, i) * B(n, j) * C(n, k);
          CHECK(std::abs(T.at({i, j, k}) - s / 4.0) < 1e-12);
        }
    const SparseTensor3 S = T.to_sparse();
    CHECK(S.at(1, 0, 1) == T.at({1, 0, 1}));
  }
  CHECK_THROWS_AS(covariance_tensor({view(Matrix::Ones(3, 2)), view(Matrix::Ones(4, 2))}),
                  ValidationError);
}

TEST_CASE("cca on identical views is perfectly correlated") {
  const ViewMatrix V = view(oracle::random_matrix(50, 3, 11));
  const CanonicalProjection p = cca(V, V, 1, 1e-8);
  CHECK(p.correlations[0] >= 1.0 - 1e-6);
}

TEST_CASE("cca on independent noise stays small") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ViewMatrix X = view(oracle::random_matrix(1000, 2, 100 + seed));
    const ViewMatrix Y = view(oracle::random_matrix(1000, 2, 200 + seed));
    CHECK(cca(X, Y, 1).correlations[0] < 0.15);
  }
}

TEST_CASE("cca matches the exhaustive angle grid in two dimensions") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto [X, Y] = correlated_views(200, 2, 2, 1.0, 300 + 10 * seed);
    const double grid = oracle::cca_angle_grid_2d(X.values, Y.values, 0.001);
    CHECK(std::abs(cca(X, Y, 1, 0.0).correlations[0] - grid) < 1e-3);
  }
}

TEST_CASE("cca direction is a local optimum of the regularized correlation") {
  auto [X, Y] = correlated_views(150, 4, 3, 0.8, 400);
  const double ridge = 1e-3;
  const CanonicalProjection p = cca(X, Y, 2, ridge);
  const ViewMatrix Xc = center_columns(X), Yc = center_columns(Y);
  const Matrix Cxx = variance_matrix(Xc, ridge), Cyy = variance_matrix(Yc, ridge);
  const Matrix Cxy = loop_covariance(Xc.values, Yc.values);
  const Vector hx = p.directions[0].col(0), hy = p.directions[1].col(0);
  const double best = regularized_correlation(Cxx, Cyy, Cxy, hx, hy);
  CHECK(best == doctest::Approx(p.correlations[0]).epsilon(1e-10));
  for (std::uint64_t t = 0; t < 100; ++t) {
    const Vector dx = oracle::random_vector(4, 1000 + t).normalized() * 1e-3;
    const Vector dy = oracle::random_vector(3, 2000 + t).normalized() * 1e-3;
    CHECK(regularized_correlation(Cxx, Cyy, Cxy, hx + dx * hx.norm(), hy) <= best + 1e-6);
    CHECK(regularized_correlation(Cxx, Cyy, Cxy, hx, hy + dy * hy.norm()) <= best + 1e-6);
  }
}

TEST_CASE("cca components are uncorrelated with unit regularized variance") {
  auto [X, Y] = correlated_views(120, 5, 4, 0.5, 500);
  const double ridge = 1e-4;
  const CanonicalProjection p = cca(X, Y, 3, ridge);
  const Matrix Cxx = variance_matrix(center_columns(X), ridge);
  const Matrix Cyy = variance_matrix(center_columns(Y), ridge);
  const Matrix Gx = p.directions[0].transpose() * Cxx * p.directions[0];
  const Matrix Gy = p.directions[1].transpose() * Cyy * p.directions[1];
  CHECK((Gx - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((Gy - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(std::is_sorted(p.correlations.rbegin(), p.correlations.rend()));
  for (double c : p.correlations) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
  // Canonical pairs correlate positively.
  for (Index c = 0; c < 3; ++c) CHECK(p.projected[0].col(c).dot(p.projected[1].col(c)) > 0);
}

TEST_CASE("cca ignores constant shifts of a view") {
  auto [X, Y] = correlated_views(80, 3, 3, 0.7, 600);
  const CanonicalProjection a = cca(X, Y, 2);
  ViewMatrix shifted = X;
  shifted.values.rowwise() += Eigen::RowVector3d(5.0, -2.0, 100.0);
  const CanonicalProjection b = cca(shifted, Y, 2);
  for (int c = 0; c < 2; ++c) CHECK(std::abs(a.correlations[c] - b.correlations[c]) < 1e-8);
}

TEST_CASE("cca errors") {
  auto [X, Y] = correlated_views(30, 3, 2, 0.5, 700);
  CHECK_THROWS_AS(cca(X, Y, 3), RankError);
  CHECK_THROWS_AS(cca(X, Y, 0), RankError);
  Matrix dup(30, 3);
  dup << X.values.leftCols(2), X.values.col(0);
  CHECK_THROWS_AS(cca(view(dup), Y, 1, 0.0), SingularityError);
  CHECK_NOTHROW(cca(view(dup), Y, 1, 1e-6));
  CHECK_THROWS_AS(cca(X, view(Y.values.topRows(20)), 1), ValidationError);
}

TEST_CASE("tcca with two views reduces to cca") {
  auto [X, Y] = correlated_views(200, 4, 5, 0.6, 800);
  const CanonicalProjection a = cca(X, Y, 3);
  const CanonicalProjection b = tcca({X, Y}, 3);
  CHECK(std::abs(a.correlations[0] - b.correlations[0]) < 1e-4);
}

TEST_CASE("tcca on three identical views") {
  const ViewMatrix V = view(oracle::random_matrix(60, 3, 900));
  const CanonicalProjection p = tcca({V, V, V}, 1, {.ridge = 1e-8, .seed = 3});
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      CHECK(sample_correlation(p.projected[a].col(0), p.projected[b].col(0)) >= 1.0 - 1e-4);
}

TEST_CASE("tcca finds a shared latent factor above the permutation null") {
  const Index n = 500;
  const Matrix z = oracle::random_matrix(n, 1, 1000);
  std::vector<ViewMatrix> views;
  for (int m = 0; m < 3; ++m) {
    Matrix V = z * oracle::random_matrix(1, 3, 1100 + m) +
               0.7 * oracle::random_matrix(n, 3, 1200 + m);
    views.push_back(view(V, m));
  }
  const CanonicalProjection p = tcca(views, 1, {.seed = 1});
  const double observed = sample_correlation(p.projected[0].col(0), p.projected[1].col(0));

  double null_mean = 0.0;
  const int trials = 5;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(5000 + t);
    std::vector<ViewMatrix> shuffled = views;
    for (int m = 1; m < 3; ++m) {
      std::vector<Index> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (Index i = 0; i < n; ++i) shuffled[m].values.row(i) = views[m].values.row(perm[i]);
    }
    const CanonicalProjection q = tcca(shuffled, 1, {.seed = 1});
    null_mean += sample_correlation(q.projected[0].col(0), q.projected[1].col(0)) / trials;
  }
  CHECK(observed - null_mean >= 0.3);
}

TEST_CASE("tcca projections have unit regularized variance and sorted correlations") {
  std::vector<ViewMatrix> views;
  const Matrix z = oracle::random_matrix(200, 2, 1300);
  for (int m = 0; m < 3; ++m) {
    views.push_back(view(z * oracle::random_matrix(2, 4, 1310 + m) +
                             0.5 * oracle::random_matrix(200, 4, 1320 + m),
                         m));
  }
  const CanonicalProjection p = tcca(views, 2, {.seed = 2});
  CHECK(std::is_sorted(p.correlations.rbegin(), p.correlations.rend()));
  for (std::size_t m = 0; m < 3; ++m) {
    const Matrix C = variance_matrix(center_columns(views[m]), p.ridges[m]);
    for (Index c = 0; c < 2; ++c) {
      const Vector h = p.directions[m].col(c);
      CHECK(std::abs(h.dot(C * h) - 1.0) < 1e-6);
    }
  }
  CHECK_THROWS_AS(tcca({views[0]}, 1), ValidationError);
  CHECK_THROWS_AS(tcca(views, 5), RankError);
}
