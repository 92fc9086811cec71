#pragma once

#include "knh/linalg.hpp"

#include <vector>

namespace knh {

/// Affine span of an entity's projected view points: a line for two views, a
/// plane for three.
class EntityFlat {
 public:
  EntityFlat(Index entity_id, std::vector<Vector> points);

  Index entity_id() const noexcept { return entity_id_; }
  const std::vector<Vector>& points() const noexcept { return points_; }
  Index dimension() const noexcept { return points_.front().size(); }
  /// Affine span has dimension below points().size() - 1.
  bool degenerate() const noexcept { return basis_.size() + 1 < points_.size(); }
  /// All points coincide; distances fall back to point-to-point.
  bool collapsed() const noexcept { return basis_.empty(); }
  /// Mutually orthogonal (not normalised) spanning directions.
  const std::vector<Vector>& basis() const noexcept { return basis_; }

 private:
  Index entity_id_;
  std::vector<Vector> points_;
  std::vector<Vector> basis_;
};

/// Hyperplane {x : normal . x + offset = 0}.
struct Hyperplane {
  Vector normal;
  double offset = 0.0;
};

inline constexpr double kFlatTolerance = 1e-10;

double point_hyperplane_distance(const Vector& p, const Hyperplane& H);

/// Distance from p0 to the line through p1 and p2 via the cross product.
double point_line_distance_3d(const Eigen::Vector3d& p0,
                              const Eigen::Vector3d& p1,
                              const Eigen::Vector3d& p2);

/// Euclidean distance from p to the affine span of F's points.
double point_flat_distance(const Vector& p, const EntityFlat& F);

enum class PairMode {
  /// Mean distance of j's points to flat i.
  OneWay,
  /// Average of the one-way distances in both directions.
  Symmetric,
};

double flat_pair_distance(const EntityFlat& Fi, const EntityFlat& Fj,
                          PairMode mode = PairMode::OneWay);

/// D(i, j) = flat_pair_distance(F_i, F_j) for j >= i, mirrored below the
/// diagonal. Rows are split across up to `threads` workers; the result does
/// not depend on the thread count.
Matrix pairwise_flat_distances(const std::vector<EntityFlat>& flats,
                               PairMode mode = PairMode::OneWay,
                               unsigned threads = 1);

/// Flats from the rows of projected view matrices (one point per view).
std::vector<EntityFlat> flats_from_projections(
    const std::vector<Matrix>& projected);

}  // namespace knh
