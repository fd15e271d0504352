#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lilo/io.hpp"

namespace lilo {

/// Standard KITTI segment lengths in meters.
inline const std::vector<double> kKittiLengths{100, 200, 300, 400, 500, 600, 700, 800};
/// Non-KITTI ladder for short synthetic paths.
inline const std::vector<double> kShortLengths{10, 20, 50};

struct SegmentOptions {
  std::vector<double> lengths = kKittiLengths;
  std::size_t stride = 10;
};

struct BucketError {
  double length = 0.0;
  std::size_t segments = 0;
  double translation_pct = 0.0;
  double rotation_deg_per_m = 0.0;
};

struct SegmentErrorReport {
  std::vector<BucketError> buckets;  // buckets with no segment are omitted
  std::size_t segments = 0;
  double ate_pct = 0.0;
  double are_deg_per_m = 0.0;
  double are_deg_per_100m() const noexcept { return are_deg_per_m * 100.0; }
};

/// KITTI devkit protocol. For each start frame (every `stride` frames) and
/// each length L, the end frame is the first whose ground-truth arc length
/// from the start reaches L; E = truth_rel⁻¹ · est_rel, translation error
/// |t(E)| / L, rotation error angle(R(E)) / L. Averages run over all
/// segments. Throws kTrajectoryTooShort when the arc is shorter than the
/// smallest length and kConfigError on mismatched trajectory lengths.
SegmentErrorReport segment_errors(const Trajectory& estimate, const Trajectory& truth,
                                  const SegmentOptions& options = {});

struct LoopClosureReport {
  double x = 0.0, y = 0.0, z = 0.0;
  double d = 0.0;
};

LoopClosureReport loop_closure_error(const Trajectory& estimate);
LoopClosureReport loop_closure_error(const Vec3& start, const Vec3& end);

/// Stage names in pipeline order.
inline constexpr std::array<const char*, 6> kStageNames{
    "projection", "filtering", "reconstruction", "association", "optimization", "map_update"};

using StageTimes = std::array<double, kStageNames.size()>;  // milliseconds

struct StageSummary {
  std::string name;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

struct RuntimeSummary {
  std::vector<StageSummary> stages;  // kStageNames order, then "total"
  std::size_t frames = 0;
  const StageSummary& total() const { return stages.back(); }
};

/// Nearest-rank percentiles. Requires at least one frame.
RuntimeSummary runtime_profile(const std::vector<StageTimes>& frames);

std::string format_report(const SegmentErrorReport* segments, const LoopClosureReport& loop);
void write_segment_csv(const std::filesystem::path& path, const SegmentErrorReport& report);

}  // namespace lilo
