#pragma once

#include <vector>

#include "lilo/geom.hpp"

namespace lilo {

/// Unordered sensor frame. `intensity` is either empty or parallel to `points`.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<float> intensity;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  void clear() {
    points.clear();
    intensity.clear();
  }
};

PointCloud transform_cloud(const PointCloud& cloud, const PoseSE3& pose);

/// Appends `extra` to `cloud`; intensities are kept only when both carry them.
void append_cloud(PointCloud& cloud, const PointCloud& extra);

}  // namespace lilo
