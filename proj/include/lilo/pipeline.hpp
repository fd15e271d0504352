#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "lilo/eval.hpp"
#include "lilo/io.hpp"
#include "lilo/odom.hpp"

namespace lilo {

/// Front end for one scan: projection, optional row interpolation,
/// segmentation, reconstruction and voxel downsampling.
struct FrameFeatures {
  SphericalRangeImage image;  // after interpolation
  FeatureImages images;
  FeatureClouds clouds;       // full resolution
  FeatureClouds downsampled;  // what the odometry consumes
  ProjectionStats projection;
};

FrameFeatures extract_features(const PointCloud& cloud, const PipelineConfig& cfg,
                               StageTimes* times = nullptr, Exec exec = Exec::kParallel);

/// Scan-to-pose driver: extract_features followed by Odometry::process.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg, Exec exec = Exec::kParallel);

  /// Pose of this scan's end in the frame of the first scan.
  PoseSE3 process(const PointCloud& cloud, double dt, StageTimes* times = nullptr);
  PoseSE3 coast(double dt) { return odometry_.coast(dt); }

  const PipelineConfig& config() const noexcept { return cfg_; }
  const Odometry& odometry() const noexcept { return odometry_; }
  const FrameFeatures& last_features() const noexcept { return last_; }
  const FrameResult& last_result() const noexcept { return last_result_; }

 private:
  PipelineConfig cfg_;
  Exec exec_;
  Odometry odometry_;
  FrameFeatures last_;
  FrameResult last_result_;
};

struct RunManifest {
  std::filesystem::path input;
  std::optional<std::filesystem::path> config;
  std::filesystem::path output;
  SensorProfile profile = SensorProfile::kHdl64;
  std::optional<int> resolution;  // image width: 360, 720 or 1024
  std::optional<FeatureGroup> features;
  bool dump_sri = false;
  bool dump_features = false;
};

/// Profile defaults, then the config file, then explicit manifest flags.
PipelineConfig resolve_config(const RunManifest& manifest);

struct RunResult {
  Trajectory trajectory;
  std::vector<StageTimes> timings;
  std::size_t skipped_frames = 0;
};

/// Runs the whole sequence and writes `poses.txt` and `timings.csv` (plus
/// dumps) into the output directory. Frame-level failures are logged and
/// the pose is carried forward by the motion model. Throws on fatal
/// configuration or IO errors.
RunResult run_odometry(const RunManifest& manifest, std::ostream& log);

void write_timings_csv(const std::filesystem::path& path, const std::vector<StageTimes>& timings);

struct EvalOptions {
  bool short_ladder = false;
  std::optional<std::filesystem::path> report_dir;  // report.txt and segments.csv
};

struct EvalResult {
  std::optional<SegmentErrorReport> segments;  // empty when the path is too short
  LoopClosureReport loop;
  std::string text;
};

/// Reads both trajectories and evaluates them. Propagates kIoError and
/// kMalformedPoseLine from the readers and kConfigError on a length mismatch.
EvalResult run_eval(const std::filesystem::path& estimate, const std::filesystem::path& truth,
                    const EvalOptions& options = {});

}  // namespace lilo
