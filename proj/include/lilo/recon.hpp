#pragma once

#include <filesystem>

#include "lilo/filter.hpp"

namespace lilo {

struct FeatureClouds {
  PointCloud edge;
  PointCloud surface;
  PointCloud ground;
};

/// Leaf sizes in meters; a non-positive leaf disables that class.
struct VoxelConfig {
  double leaf_edge = 0.2;
  double leaf_surface = 0.4;
  double leaf_ground = 0.4;

  void validate() const;
};

/// ω(j) = π − 2πj/N.
double azimuth_of_column(int j, int width);

struct ReconstructionStats {
  std::size_t emitted = 0;
  std::size_t clamped = 0;  // pixels with |z| > r, emitted with ρ = 0
};

/// Each valid pixel with range r and height z becomes
/// (ρ cos ω, ρ sin ω, z), ρ = √max(r² − z², 0). Points come out in row-major
/// pixel order for both execution policies.
PointCloud reconstruct(const FeatureImage& feature, const Grid<double>& z_map,
                       ReconstructionStats* stats = nullptr, Exec exec = Exec::kParallel);

FeatureClouds reconstruct_features(const FeatureImages& features, Exec exec = Exec::kParallel);

/// Centroid of each occupied voxel, ordered by voxel index (x, then y, then z).
PointCloud voxel_downsample(const PointCloud& cloud, double leaf, Exec exec = Exec::kParallel);

FeatureClouds voxel_downsample(const FeatureClouds& clouds, const VoxelConfig& cfg,
                               Exec exec = Exec::kParallel);

/// ASCII PLY with edge red, surface blue, ground green.
void write_feature_ply(const std::filesystem::path& path, const FeatureClouds& clouds);

}  // namespace lilo
