#include "knh/flats.hpp"

#include "knh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace knh {

EntityFlat::EntityFlat(Index entity_id, std::vector<Vector> points)
    : entity_id_(entity_id), points_(std::move(points)) {
  if (points_.size() < 2) {
    throw ValidationError("flat needs at least 2 points");
  }
  const Index dim = points_.front().size();
  for (const auto& p : points_) {
    if (p.size() != dim) throw ValidationError("flat points differ in dimension");
    if (!p.allFinite()) throw ValidationError("flat point is not finite");
  }
  // Modified Gram-Schmidt over q_k = points[k] - points[0], dropping
  // directions that are dependent on earlier ones.
  for (std::size_t k = 1; k < points_.size(); ++k) {
    Vector q = points_[k] - points_[0];
    const double scale = std::max(1.0, q.norm());
    for (const auto& e : basis_) q -= (q.dot(e) / e.dot(e)) * e;
    if (q.norm() > kFlatTolerance * scale) basis_.push_back(std::move(q));
  }
}

double point_hyperplane_distance(const Vector& p, const Hyperplane& H) {
  if (p.size() != H.normal.size()) {
    throw ValidationError("point and hyperplane differ in dimension");
  }
  const double n = H.normal.norm();
  if (!(n > 0.0)) throw ValidationError("hyperplane normal is zero");
  return std::abs(H.normal.dot(p) + H.offset) / n;
}

double point_line_distance_3d(const Eigen::Vector3d& p0,
                              const Eigen::Vector3d& p1,
                              const Eigen::Vector3d& p2) {
  const double len = (p2 - p1).norm();
  if (len == 0.0) {
    throw DegenerateFlatError("line endpoints coincide");
  }
  return (p2 - p0).cross(p1 - p0).norm() / len;
}

double point_flat_distance(const Vector& p, const EntityFlat& F) {
  if (p.size() != F.dimension()) {
    throw ValidationError("point and flat differ in dimension");
  }
  Vector r = p - F.points().front();
  for (const auto& e : F.basis()) {
    const double t = r.dot(e) / e.dot(e);
    r -= t * e;
  }
  return r.norm();
}

namespace {

double one_way(const EntityFlat& Fi, const EntityFlat& Fj) {
  double sum = 0.0;
  for (const auto& p : Fj.points()) sum += point_flat_distance(p, Fi);
  return sum / static_cast<double>(Fj.points().size());
}

}  // namespace

double flat_pair_distance(const EntityFlat& Fi, const EntityFlat& Fj,
                          PairMode mode) {
  if (Fi.points().size() != Fj.points().size() ||
      Fi.dimension() != Fj.dimension()) {
    throw ValidationError("flats differ in view count or dimension");
  }
  if (mode == PairMode::Symmetric) {
    return 0.5 * (one_way(Fi, Fj) + one_way(Fj, Fi));
  }
  return one_way(Fi, Fj);
}

Matrix pairwise_flat_distances(const std::vector<EntityFlat>& flats,
                               PairMode mode, unsigned threads) {
  if (flats.empty()) throw ValidationError("no flats to compare");
  const Index n = static_cast<Index>(flats.size());
  for (const auto& f : flats) {
    if (f.points().size() != flats.front().points().size() ||
        f.dimension() != flats.front().dimension()) {
      throw ValidationError("flats differ in view count or dimension");
    }
  }
  Matrix D = Matrix::Zero(n, n);
  auto rows = [&](Index begin, Index step) {
    for (Index i = begin; i < n; i += step)
      for (Index j = i + 1; j < n; ++j)
        D(i, j) = flat_pair_distance(flats[i], flats[j], mode);
  };
  const unsigned workers = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(n));
  if (workers == 1) {
    rows(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(rows, w, workers);
  }
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) D(j, i) = D(i, j);
  return D;
}

std::vector<EntityFlat> flats_from_projections(
    const std::vector<Matrix>& projected) {
  if (projected.size() < 2) throw ValidationError("flats need at least 2 views");
  const Index n = projected.front().rows();
  for (const auto& P : projected) {
    if (P.rows() != n || P.cols() != projected.front().cols()) {
      throw ValidationError("projected views differ in shape");
    }
  }
  std::vector<EntityFlat> flats;
  flats.reserve(n);
  for (Index i = 0; i < n; ++i) {
    std::vector<Vector> points;
    for (const auto& P : projected) points.emplace_back(P.row(i).transpose());
    flats.emplace_back(i, std::move(points));
  }
  return flats;
}

}  // namespace knh
