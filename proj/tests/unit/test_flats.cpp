#include "knh/errors.hpp"
#include "knh/flats.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace knh;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

EntityFlat flat(std::vector<Vector> pts, Index id = 0) { return EntityFlat(id, std::move(pts)); }

}  // namespace

TEST_CASE("point_hyperplane_distance") {
  CHECK(point_hyperplane_distance(vec({0, 0, 5}), {vec({0, 0, 1}), 0.0}) == 5.0);
  CHECK(point_hyperplane_distance(vec({3, 4}), {vec({3, 4}), -25.0}) == doctest::Approx(0.0));
  // Scaling the equation leaves the distance alone.
  const Vector p = oracle::random_vector(4, 1);
  const Hyperplane H{oracle::random_vector(4, 2), 0.7};
  const Hyperplane H3{3.0 * H.normal, 2.1};
  CHECK(point_hyperplane_distance(p, H) ==
        doctest::Approx(point_hyperplane_distance(p, H3)).epsilon(1e-12));
  CHECK_THROWS_AS(point_hyperplane_distance(vec({1, 2}), {vec({0, 0}), 1.0}), ValidationError);
  CHECK_THROWS_AS(point_hyperplane_distance(vec({1, 2}), {vec({1, 0, 0}), 1.0}),
                  ValidationError);
}

TEST_CASE("3D line distance: cross product agrees with projection") {
  for (std::uint64_t t = 0; t < 1000; ++t) {
    const Vector r = oracle::random_vector(9, 10 + t);
    const Eigen::Vector3d p0 = r.segment<3>(0), p1 = r.segment<3>(3), p2 = r.segment<3>(6);
    const double cross = point_line_distance_3d(p0, p1, p2);
    const double proj = oracle::line_distance_projection(p0, p1, p2);
    CHECK(std::abs(cross - proj) <= 1e-10 * std::max(1.0, proj));
    CHECK(std::abs(point_flat_distance(p0, flat({p1, p2})) - proj) <= 1e-10 * std::max(1.0, proj));
  }
  const Eigen::Vector3d a(1, 2, 3);
  CHECK_THROWS_AS(point_line_distance_3d(Eigen::Vector3d::Zero(), a, a), DegenerateFlatError);
}

TEST_CASE("plane distance in R^4 matches the normal-equation oracle") {
  for (std::uint64_t t = 0; t < 200; ++t) {
    const Vector c = oracle::random_vector(4, 3000 + t);
    const Vector a = oracle::random_vector(4, 4000 + t);
    const Vector b = oracle::random_vector(4, 5000 + t);
    const Vector p = oracle::random_vector(4, 6000 + t);
    const EntityFlat F = flat({c, a, b});
    CHECK_FALSE(F.degenerate());
    const double expected = oracle::plane_distance_least_squares(p, c, a - c, b - c);
    CHECK(std::abs(point_flat_distance(p, F) - expected) < 1e-10 * std::max(1.0, expected));
  }
}

TEST_CASE("two-view pair distance is the literal edge-weight loop") {
  for (std::uint64_t t = 0; t < 200; ++t) {
    const Vector P1i = oracle::random_vector(10, 7000 + t), P2i = oracle::random_vector(10, 7100 + t);
    const Vector P1j = oracle::random_vector(10, 7200 + t), P2j = oracle::random_vector(10, 7300 + t);
    const double d = flat_pair_distance(flat({P1i, P2i}), flat({P1j, P2j}));
    const double expected = oracle::two_view_edge_weight(P1i, P2i, P1j, P2j);
    CHECK(std::abs(d - expected) < 1e-12 * std::max(1.0, expected));
  }
}

TEST_CASE("hand-computed pair distance") {
  // Line i is the x-axis; both of j's points sit at height 2.
  const EntityFlat Fi = flat({vec({0, 0}), vec({1, 0})});
  const EntityFlat Fj = flat({vec({0, 2}), vec({5, -2})});
  CHECK(flat_pair_distance(Fi, Fj) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("pair distance is invariant to rigid motions") {
  const Index dim = 5;
  const Matrix Q = oracle::random_orthogonal(dim, 8);
  const Vector shift = oracle::random_vector(dim, 9);
  for (std::uint64_t t = 0; t < 20; ++t) {
    std::vector<Vector> a, b, ra, rb;
    for (int m = 0; m < 3; ++m) {
      a.push_back(oracle::random_vector(dim, 100 * t + m));
      b.push_back(oracle::random_vector(dim, 100 * t + 50 + m));
      ra.push_back(Q * a.back() + shift);
      rb.push_back(Q * b.back() + shift);
    }
    for (PairMode mode : {PairMode::OneWay, PairMode::Symmetric}) {
      const double d = flat_pair_distance(flat(a), flat(b), mode);
      const double dr = flat_pair_distance(flat(ra), flat(rb), mode);
      CHECK(std::abs(d - dr) < 1e-10 * std::max(1.0, d));
    }
  }
}

TEST_CASE("distance shrinks as j's points approach flat i") {
  const EntityFlat Fi = flat({vec({0, 0, 0}), vec({1, 1, 0})});
  double previous = INFINITY;
  for (double h : {4.0, 2.0, 1.0, 0.5, 0.0}) {
    const EntityFlat Fj = flat({vec({3, 3, h}), vec({-1, -1, h})});
    const double d = flat_pair_distance(Fi, Fj);
    CHECK(d <= previous);
    previous = d;
  }
  CHECK(previous == doctest::Approx(0.0));
}

TEST_CASE("intersecting lines are not at distance zero") {
  // The pair distance measures j's points against flat i, not the gap between
  // flats; crossing lines still have positive distance.
  const EntityFlat Fi = flat({vec({-1, 0}), vec({1, 0})});
  const EntityFlat Fj = flat({vec({0, -1}), vec({0, 1})});
  CHECK(flat_pair_distance(Fi, Fj) == doctest::Approx(1.0));
  // Parallel lines at separation s give exactly s regardless of where the
  // points sit along them.
  const EntityFlat Fk = flat({vec({10, 3}), vec({-7, 3})});
  CHECK(flat_pair_distance(Fi, Fk) == doctest::Approx(3.0));
}

TEST_CASE("parallel flats with equal angles get different distances") {
  // Planes j and k share plane i's direction subspace, so any angle-based
  // score ties them; the point-to-flat distance separates them.
  const EntityFlat Fi = flat({vec({0, 0, 0, 0}), vec({1, 0, 0, 0}), vec({0, 1, 0, 0})});
  const EntityFlat Fj = flat({vec({2, 1, 0.5, 0}), vec({3, 1, 0.5, 0}), vec({2, 2, 0.5, 0})});
  const EntityFlat Fk = flat({vec({2, 1, 4, 0}), vec({3, 1, 4, 0}), vec({2, 2, 4, 0})});
  for (std::size_t b = 0; b < 2; ++b) {
    CHECK(Fj.basis()[b].normalized().isApprox(Fi.basis()[b].normalized()));
    CHECK(Fk.basis()[b].normalized().isApprox(Fi.basis()[b].normalized()));
  }
  const double dj = flat_pair_distance(Fi, Fj), dk = flat_pair_distance(Fi, Fk);
  CHECK(dj == doctest::Approx(0.5));
  CHECK(dk == doctest::Approx(4.0));
  CHECK(dj < dk);
}

TEST_CASE("degenerate and collapsed flats") {
  const Vector p = vec({1, 2, 3});
  const EntityFlat point = flat({p, p});
  CHECK(point.collapsed());
  CHECK(point.degenerate());
  CHECK(point_flat_distance(vec({1, 2, 7}), point) == doctest::Approx(4.0));

  const EntityFlat collinear = flat({vec({0, 0, 0}), vec({1, 0, 0}), vec({2, 0, 0})});
  CHECK(collinear.degenerate());
  CHECK_FALSE(collinear.collapsed());
  CHECK(collinear.basis().size() == 1);
  CHECK(point_flat_distance(vec({5, 0, 2}), collinear) == doctest::Approx(2.0));

  CHECK_THROWS_AS(flat({p}), ValidationError);
  CHECK_THROWS_AS(flat({p, vec({1, 2})}), ValidationError);
  CHECK_THROWS_AS(flat({p, vec({1, NAN, 2})}), ValidationError);
  CHECK_THROWS_AS(flat_pair_distance(point, flat({vec({1, 2}), vec({3, 4})})), ValidationError);
}

TEST_CASE("pairwise_flat_distances agrees with elementwise calls") {
  std::vector<Matrix> projected = {oracle::random_matrix(17, 4, 1), oracle::random_matrix(17, 4, 2),
                                   oracle::random_matrix(17, 4, 3)};
  const auto flats = flats_from_projections(projected);
  REQUIRE(flats.size() == 17);
  for (PairMode mode : {PairMode::OneWay, PairMode::Symmetric}) {
    const Matrix D1 = pairwise_flat_distances(flats, mode, 1);
    const Matrix D4 = pairwise_flat_distances(flats, mode, 4);
    CHECK(D1 == D4);
    CHECK(D1 == D1.transpose());
    for (Index i = 0; i < 17; ++i) {
      CHECK(D1(i, i) == 0.0);
      for (Index j = i + 1; j < 17; ++j)
        CHECK(D1(i, j) == flat_pair_distance(flats[i], flats[j], mode));
    }
  }
  const Matrix single = pairwise_flat_distances({flats.front()});
  CHECK(single.rows() == 1);
  CHECK(single(0, 0) == 0.0);
  CHECK_THROWS_AS(pairwise_flat_distances({}), ValidationError);
  CHECK_THROWS_AS(flats_from_projections({projected[0]}), ValidationError);
  CHECK_THROWS_AS(flats_from_projections({projected[0], projected[1].topRows(3)}),
                  ValidationError);
}
