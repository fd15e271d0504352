#include "lilo/recon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <tuple>

namespace lilo {

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  auto operator<=>(const VoxelKey&) const = default;
};

}  // namespace

void VoxelConfig::validate() const {
  if (!std::isfinite(leaf_edge) || !std::isfinite(leaf_surface) || !std::isfinite(leaf_ground)) {
    throw Error(ErrorCode::kConfigError, "voxel leaf sizes must be finite");
  }
}

double azimuth_of_column(int j, int width) {
  return std::numbers::pi - (2.0 * std::numbers::pi * j) / width;
}

PointCloud reconstruct(const FeatureImage& feature, const Grid<double>& z_map,
                       ReconstructionStats* stats, Exec exec) {
  const int rows = feature.range.rows();
  const int cols = feature.range.cols();

  // Exclusive prefix count per row fixes every output slot up front.
  std::vector<std::size_t> offset(static_cast<std::size_t>(rows) + 1, 0);
  for (int i = 0; i < rows; ++i) {
    const std::uint8_t* m = feature.valid.row(i);
    offset[i + 1] = offset[i] + static_cast<std::size_t>(std::count(m, m + cols, 1));
  }

  PointCloud out;
  out.points.resize(offset[rows]);
  std::size_t clamped = 0;
#pragma omp parallel for schedule(static) reduction(+ : clamped) if (exec == Exec::kParallel)
  for (int i = 0; i < rows; ++i) {
    std::size_t k = offset[i];
    for (int j = 0; j < cols; ++j) {
      if (!feature.valid(i, j)) continue;
      const double r = feature.range(i, j);
      const double z = z_map(i, j);
      const double rho2 = r * r - z * z;
      if (rho2 < 0.0) ++clamped;
      const double rho = std::sqrt(std::max(rho2, 0.0));
      const double omega = azimuth_of_column(j, cols);
      out.points[k++] = Vec3(rho * std::cos(omega), rho * std::sin(omega), z);
    }
  }
  if (stats != nullptr) {
    stats->emitted += out.points.size();
    stats->clamped += clamped;
  }
  return out;
}

FeatureClouds reconstruct_features(const FeatureImages& features, Exec exec) {
  return {reconstruct(features.edge, features.z_map, nullptr, exec),
          reconstruct(features.surface, features.z_map, nullptr, exec),
          reconstruct(features.ground, features.z_map, nullptr, exec)};
}

PointCloud voxel_downsample(const PointCloud& cloud, double leaf, Exec exec) {
  if (!(leaf > 0.0) || cloud.empty()) return cloud;
  const auto n = static_cast<std::int64_t>(cloud.points.size());
  const bool with_intensity = cloud.intensity.size() == cloud.points.size();
  const double inv = 1.0 / leaf;

  std::vector<VoxelKey> keys(cloud.points.size());
#pragma omp parallel for schedule(static) if (exec == Exec::kParallel)
  for (std::int64_t k = 0; k < n; ++k) {
    const Vec3& p = cloud.points[k];
    keys[k] = {static_cast<std::int64_t>(std::floor(p.x() * inv)),
               static_cast<std::int64_t>(std::floor(p.y() * inv)),
               static_cast<std::int64_t>(std::floor(p.z() * inv))};
  }

  std::vector<std::uint32_t> order(cloud.points.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::tie(keys[a], a) < std::tie(keys[b], b);
  });

  PointCloud out;
  for (std::size_t s = 0; s < order.size();) {
    std::size_t e = s;
    Vec3 sum = Vec3::Zero();
    double isum = 0.0;
    while (e < order.size() && keys[order[e]] == keys[order[s]]) {
      sum += cloud.points[order[e]];
      if (with_intensity) isum += cloud.intensity[order[e]];
      ++e;
    }
    const double count = static_cast<double>(e - s);
    out.points.push_back(sum / count);
    if (with_intensity) out.intensity.push_back(static_cast<float>(isum / count));
    s = e;
  }
  return out;
}

FeatureClouds voxel_downsample(const FeatureClouds& clouds, const VoxelConfig& cfg, Exec exec) {
  return {voxel_downsample(clouds.edge, cfg.leaf_edge, exec),
          voxel_downsample(clouds.surface, cfg.leaf_surface, exec),
          voxel_downsample(clouds.ground, cfg.leaf_ground, exec)};
}

void write_feature_ply(const std::filesystem::path& path, const FeatureClouds& clouds) {
  std::ofstream os(path);
  if (!os) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  const std::size_t total = clouds.edge.size() + clouds.surface.size() + clouds.ground.size();
  os << "ply\nformat ascii 1.0\nelement vertex " << total
     << "\nproperty float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  const auto emit = [&os](const PointCloud& cloud, const char* rgb) {
    for (const Vec3& p : cloud.points) {
      os << static_cast<float>(p.x()) << ' ' << static_cast<float>(p.y()) << ' '
         << static_cast<float>(p.z()) << ' ' << rgb << '\n';
    }
  };
  emit(clouds.edge, "255 0 0");
  emit(clouds.surface, "0 0 255");
  emit(clouds.ground, "0 255 0");
  if (!os) {
    throw Error(ErrorCode::kIoError, "write failed for " + path.string());
  }
}

}  // namespace lilo
