// Serial reference path versus the OpenMP kernels on one synthetic HDL-64
// scan. Usage: bench_kernels [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "lilo/filter.hpp"
#include "lilo/io.hpp"
#include "lilo/odom.hpp"
#include "lilo/recon.hpp"
#include "lilo/sri.hpp"
#include "scene.hpp"

using namespace lilo;

namespace {

// Best of `repeats` wall-clock runs, milliseconds.
double best_ms(int repeats, const std::function<void()>& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
    best = std::min(best, dt.count());
  }
  return best;
}

void row(const char* name, int repeats, const std::function<void(Exec)>& f) {
  const double serial = best_ms(repeats, [&] { f(Exec::kSerial); });
  const double parallel = best_ms(repeats, [&] { f(Exec::kParallel); });
  std::printf("%-18s %10.3f %10.3f %8.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 5;

  const sim::Scene scene = sim::loop_scene(100.0, 50.0, 7);
  const PointCloud cloud = sim::scan(scene, make_pose(Mat3::Identity(), Vec3(0, -25, 0)),
                                     Twist{}, sim::LidarModel::hdl64());
  const PipelineConfig cfg;
  const SphericalRangeImage img = project(cloud, cfg.sri).image;
  const FeatureImages features = segment_sobel(img, cfg.sobel);
  const FeatureClouds clouds = reconstruct_features(features);
  const FeatureClouds down = voxel_downsample(clouds, cfg.voxel);

  LocalFeatureMap map(cfg.odom.map_leaf_edge, cfg.odom.map_leaf_surface, cfg.odom.map_trim_radius);
  update_map(map, down, PoseSE3::identity(), cfg.odom);
  const PointCloud planar =
      voxel_downsample(plane_group(down, cfg.odom.feature_group), cfg.odom.map_leaf_surface);
  const PoseSE3 start = make_pose(rot_z(0.01), Vec3(0.2, -0.05, 0.0));

  std::printf("%zu points, %dx%d image, %d OpenMP threads, best of %d\n", cloud.size(),
              img.rows(), img.cols(), omp_get_max_threads(), repeats);
  std::printf("%-18s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");
  row("project", repeats, [&](Exec e) { project(cloud, cfg.sri, e); });
  row("convolve3x3", repeats, [&](Exec e) { convolve3x3(img.range, img.valid, kEdgeMask, e); });
  row("segment_sobel", repeats, [&](Exec e) { segment_sobel(img, cfg.sobel, e); });
  row("reconstruct", repeats, [&](Exec e) { reconstruct_features(features, e); });
  row("voxel_downsample", repeats, [&](Exec e) { voxel_downsample(clouds, cfg.voxel, e); });
  row("estimate_pose", repeats,
      [&](Exec e) { estimate_pose(down.edge, planar, map, start, cfg.odom, e); });
  return 0;
}
