#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "lilo/geom.hpp"

namespace lilo {

struct Neighbor {
  std::uint32_t index;
  double squared_distance;
};

/// Static 3D kd-tree over a point array it owns. Rebuilt, never mutated.
/// Distance ties are broken by point index, so results are deterministic.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<Vec3> points);

  const std::vector<Vec3>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  /// All points with |p − q| ≤ radius, sorted by (distance, index).
  std::vector<Neighbor> radius_search(const Vec3& query, double radius) const;

  /// The k nearest points, sorted by (distance, index), optionally limited to
  /// |p − q| ≤ max_radius.
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k,
                            double max_radius = std::numeric_limits<double>::infinity()) const;

 private:
  struct Node {
    // Leaf when axis < 0: [begin, end) into index_. Otherwise split at value.
    std::int32_t axis = -1;
    double split = 0.0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> index_;
  std::vector<Node> nodes_;
};

}  // namespace lilo
