#pragma once

#include "piezohom/types.hpp"

#include <cmath>
#include <unordered_map>
#include <vector>

namespace piezohom::detail {

/// Tolerance lookup of 3D points on a hash grid.
class PointLocator {
 public:
  explicit PointLocator(double tol) : tol_(tol), cell_(10.0 * tol) {}

  void insert(Index id, const Vec3& x) {
    ids_.push_back(id);
    points_.push_back(x);
    buckets_[key(cell_of(x, 0), cell_of(x, 1), cell_of(x, 2))].push_back(points_.size() - 1);
  }

  /// Smallest inserted id within tol of x, or -1.
  Index find(const Vec3& x) const {
    Index best = -1;
    const long long c0 = cell_of(x, 0), c1 = cell_of(x, 1), c2 = cell_of(x, 2);
    for (long long a = -1; a <= 1; ++a)
      for (long long b = -1; b <= 1; ++b)
        for (long long c = -1; c <= 1; ++c) {
          auto it = buckets_.find(key(c0 + a, c1 + b, c2 + c));
          if (it == buckets_.end()) continue;
          for (std::size_t k : it->second)
            if ((points_[k] - x).norm() <= tol_ && (best < 0 || ids_[k] < best)) best = ids_[k];
        }
    return best;
  }

 private:
  long long cell_of(const Vec3& x, int k) const { return std::llround(x(k) / cell_); }
  static long long key(long long a, long long b, long long c) {
    return (a * 73856093LL) ^ (b * 19349663LL) ^ (c * 83492791LL);
  }
  double tol_;
  double cell_;
  std::vector<Index> ids_;
  std::vector<Vec3> points_;
  std::unordered_map<long long, std::vector<std::size_t>> buckets_;
};

}  // namespace piezohom::detail
