#include "lilo/point_cloud.hpp"

namespace lilo {

PointCloud transform_cloud(const PointCloud& cloud, const PoseSE3& pose) {
  PointCloud out;
  out.points.resize(cloud.points.size());
  for (std::size_t k = 0; k < cloud.points.size(); ++k) {
    out.points[k] = pose.apply(cloud.points[k]);
  }
  out.intensity = cloud.intensity;
  return out;
}

void append_cloud(PointCloud& cloud, const PointCloud& extra) {
  const bool keep_intensity = cloud.intensity.size() == cloud.points.size() &&
                              extra.intensity.size() == extra.points.size();
  cloud.points.insert(cloud.points.end(), extra.points.begin(), extra.points.end());
  if (keep_intensity) {
    cloud.intensity.insert(cloud.intensity.end(), extra.intensity.begin(), extra.intensity.end());
  } else {
    cloud.intensity.clear();
  }
}

}  // namespace lilo
