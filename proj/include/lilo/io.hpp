#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lilo/filter.hpp"
#include "lilo/odom.hpp"
#include "lilo/recon.hpp"
#include "lilo/sri.hpp"

namespace lilo {

using Trajectory = std::vector<PoseSE3>;

enum class SensorProfile { kHdl64, kVlp16 };
enum class FilterPath { kSobel, kFft };

std::string_view to_string(SensorProfile profile);
std::string_view to_string(FilterPath path);

/// Everything the pipeline needs.
struct PipelineConfig {
  SriParams sri;
  SobelConfig sobel;
  VoxelConfig voxel;
  OdomConfig odom;
  FilterPath filter_path = FilterPath::kSobel;

  void validate() const;
};

/// Profile defaults: hdl64 → Sobel, 64×720, EGS, +2°…−24.8°;
/// vlp16 → FFT, 16 beams interpolated ×2 (32×720), ES, ±15°.
PipelineConfig profile_defaults(SensorProfile profile);

struct ReadStats {
  std::size_t records = 0;
  std::size_t dropped_non_finite = 0;
};

/// KITTI velodyne scan: little-endian float32 records (x, y, z, intensity).
/// Throws kMalformedFrame when the size is not a multiple of 16 bytes and
/// kIoError when the file cannot be read.
PointCloud read_velodyne_bin(const std::filesystem::path& path, ReadStats* stats = nullptr);
void write_velodyne_bin(const std::filesystem::path& path, const PointCloud& cloud);

/// One line per pose: row-major [R | t], 12 values, 9 significant digits.
void write_kitti_poses(const Trajectory& trajectory, const std::filesystem::path& path);
std::string format_kitti_pose(const PoseSE3& pose);
/// Throws kMalformedPoseLine (with the 1-based line number) on a bad line.
Trajectory read_kitti_poses(const std::filesystem::path& path);

/// Flat `key = value` file, '#' comments. Keys override `base`. Throws
/// kConfigError naming the key for unknown keys and type mismatches.
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});
PipelineConfig parse_config(const std::string& text, PipelineConfig base = {});
/// Applies a single `key`, `value` pair.
void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// Sorted `*.bin` files of a directory, with timestamps from a `times.txt`
/// found in the directory or its parent when its line count matches.
class FrameSource {
 public:
  explicit FrameSource(const std::filesystem::path& directory);

  std::size_t size() const noexcept { return files_.size(); }
  const std::filesystem::path& path(std::size_t k) const { return files_.at(k); }
  std::optional<double> timestamp(std::size_t k) const;
  PointCloud load(std::size_t k, ReadStats* stats = nullptr) const;

 private:
  std::vector<std::filesystem::path> files_;
  std::vector<double> times_;
};

}  // namespace lilo
