#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "dianalytic/sphere.hpp"

namespace dianalytic {

/// Sample set on the sphere with nearest-neighbour chordal distance queries.
/// Points are bucketed on a uniform grid over the cube [-1,1]^3; the chordal
/// distance is the Euclidean distance between stereographic images.
class SphereCloud {
 public:
  explicit SphereCloud(double cell = 0.05) : cell_(cell), cells_(static_cast<int>(std::ceil(2.0 / cell)) + 1) {}

  void add(const SpherePoint& z) { add(to_unit_vector(z)); }
  void add(const std::array<double, 3>& v) {
    buckets_[key(index(v))].push_back(static_cast<std::uint32_t>(pts_.size()));
    pts_.push_back(v);
  }
  template <class Range>
  void add_all(const Range& r) {
    for (const auto& z : r) add(z);
  }

  std::size_t size() const { return pts_.size(); }
  bool empty() const { return pts_.empty(); }

  /// Chordal distance to the nearest stored point, +inf when empty.
  double nearest(const SpherePoint& z) const { return nearest(to_unit_vector(z)); }
  double nearest(const std::array<double, 3>& v) const {
    if (pts_.empty()) return std::numeric_limits<double>::infinity();
    const auto c = index(v);
    double best2 = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= cells_; ++r) {
      // every point in shell r is at least (r - 1) * cell away
      if (r > 0) {
        const double lb = (r - 1) * cell_;
        if (lb * lb > best2) break;
      }
      for (int dx = -r; dx <= r; ++dx) {
        for (int dy = -r; dy <= r; ++dy) {
          for (int dz = -r; dz <= r; ++dz) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) continue;
            const std::array<int, 3> q{c[0] + dx, c[1] + dy, c[2] + dz};
            if (q[0] < 0 || q[1] < 0 || q[2] < 0 || q[0] >= cells_ || q[1] >= cells_ || q[2] >= cells_) continue;
            const auto it = buckets_.find(key(q));
            if (it == buckets_.end()) continue;
            for (const auto id : it->second) {
              const auto& p = pts_[id];
              const double d2 = (p[0] - v[0]) * (p[0] - v[0]) + (p[1] - v[1]) * (p[1] - v[1]) +
                                (p[2] - v[2]) * (p[2] - v[2]);
              best2 = std::min(best2, d2);
            }
          }
        }
      }
    }
    return std::sqrt(best2);
  }

 private:
  std::array<int, 3> index(const std::array<double, 3>& v) const {
    std::array<int, 3> c{};
    for (int i = 0; i < 3; ++i) {
      c[static_cast<std::size_t>(i)] =
          std::clamp(static_cast<int>((v[static_cast<std::size_t>(i)] + 1.0) / cell_), 0, cells_ - 1);
    }
    return c;
  }
  std::int64_t key(const std::array<int, 3>& c) const {
    return (static_cast<std::int64_t>(c[0]) * cells_ + c[1]) * cells_ + c[2];
  }

  double cell_;
  int cells_;
  std::vector<std::array<double, 3>> pts_;
  std::unordered_map<std::int64_t, std::vector<std::uint32_t>> buckets_;
};

}  // namespace dianalytic
