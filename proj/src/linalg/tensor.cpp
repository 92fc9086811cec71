#include "knh/errors.hpp"
#include "knh/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace knh {

void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) {
    throw ValidationError(what + " contains non-finite values");
  }
}

SparseTensor3::SparseTensor3(std::int64_t I, std::int64_t J, std::int64_t K)
    : dims_{I, J, K} {
  if (I < 1 || J < 1 || K < 1) {
    throw ValidationError("tensor dimensions must be positive");
  }
}

void SparseTensor3::add(std::int64_t i, std::int64_t j, std::int64_t k,
                        double value) {
  if (i < 0 || i >= dims_[0] || j < 0 || j >= dims_[1] || k < 0 ||
      k >= dims_[2]) {
    throw ValidationError("tensor coordinate (" + std::to_string(i) + "," +
                          std::to_string(j) + "," + std::to_string(k) +
                          ") out of bounds");
  }
  if (!std::isfinite(value)) {
    throw ValidationError("tensor value is not finite");
  }
  entries_.push_back({i, j, k, value});
  canonical_ = false;
}

namespace {
auto key(const TensorEntry& e) { return std::tie(e.k, e.j, e.i); }
}  // namespace

void SparseTensor3::canonicalize() {
  if (canonical_) return;
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const TensorEntry& a, const TensorEntry& b) {
                     return key(a) < key(b);
                   });
  std::vector<TensorEntry> merged;
  merged.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (!merged.empty() && key(merged.back()) == key(e)) {
      merged.back().value += e.value;
    } else {
      merged.push_back(e);
    }
  }
  entries_ = std::move(merged);
  canonical_ = true;
}

double SparseTensor3::frobenius_norm() const {
  if (canonical_) {
    double s = 0.0;
    for (const auto& e : entries_) s += e.value * e.value;
    return std::sqrt(s);
  }
  SparseTensor3 copy = *this;
  copy.canonicalize();
  return copy.frobenius_norm();
}

double SparseTensor3::at(std::int64_t i, std::int64_t j, std::int64_t k) const {
  if (canonical_) {
    TensorEntry probe{i, j, k, 0.0};
    auto it = std::lower_bound(entries_.begin(), entries_.end(), probe,
                               [](const TensorEntry& a, const TensorEntry& b) {
                                 return key(a) < key(b);
                               });
    if (it != entries_.end() && it->i == i && it->j == j && it->k == k) {
      return it->value;
    }
    return 0.0;
  }
  double s = 0.0;
  for (const auto& e : entries_) {
    if (e.i == i && e.j == j && e.k == k) s += e.value;
  }
  return s;
}

}  // namespace knh
