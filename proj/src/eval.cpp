#include "lilo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace lilo {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::vector<double> arc_lengths(const Trajectory& poses) {
  std::vector<double> dist(poses.size(), 0.0);
  for (std::size_t k = 1; k < poses.size(); ++k) {
    dist[k] = dist[k - 1] + (poses[k].translation - poses[k - 1].translation).norm();
  }
  return dist;
}

// First index whose arc length reaches dist[first] + length, or npos.
std::size_t last_frame(const std::vector<double>& dist, std::size_t first, double length) {
  const auto it = std::lower_bound(dist.begin() + static_cast<std::ptrdiff_t>(first), dist.end(),
                                   dist[first] + length);
  if (it == dist.end()) return std::string::npos;
  return static_cast<std::size_t>(it - dist.begin());
}

double rank_percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

SegmentErrorReport segment_errors(const Trajectory& estimate, const Trajectory& truth,
                                  const SegmentOptions& options) {
  if (estimate.size() != truth.size() || truth.size() < 2) {
    throw Error(ErrorCode::kConfigError,
                "trajectories must have equal length >= 2 (estimate " +
                    std::to_string(estimate.size()) + ", truth " + std::to_string(truth.size()) + ")");
  }
  const std::vector<double> dist = arc_lengths(truth);
  const double shortest = *std::min_element(options.lengths.begin(), options.lengths.end());
  if (dist.back() < shortest) {
    throw Error(ErrorCode::kTrajectoryTooShort,
                "ground-truth arc " + std::to_string(dist.back()) + " m < " +
                    std::to_string(shortest) + " m");
  }

  SegmentErrorReport report;
  double t_sum = 0.0;
  double r_sum = 0.0;
  const std::size_t stride = std::max<std::size_t>(options.stride, 1);
  for (const double length : options.lengths) {
    BucketError bucket{length, 0, 0.0, 0.0};
    for (std::size_t first = 0; first < truth.size(); first += stride) {
      const std::size_t last = last_frame(dist, first, length);
      if (last == std::string::npos) continue;
      const PoseSE3 truth_rel = truth[first].inverse() * truth[last];
      const PoseSE3 est_rel = estimate[first].inverse() * estimate[last];
      const PoseSE3 error = truth_rel.inverse() * est_rel;
      const double t_err = error.translation.norm() / length;
      const double r_err = error.rotation_angle() / length;
      bucket.translation_pct += t_err;
      bucket.rotation_deg_per_m += r_err;
      ++bucket.segments;
      t_sum += t_err;
      r_sum += r_err;
    }
    if (bucket.segments == 0) continue;
    bucket.translation_pct = 100.0 * bucket.translation_pct / static_cast<double>(bucket.segments);
    bucket.rotation_deg_per_m =
        kRadToDeg * bucket.rotation_deg_per_m / static_cast<double>(bucket.segments);
    report.segments += bucket.segments;
    report.buckets.push_back(bucket);
  }
  if (report.segments > 0) {
    report.ate_pct = 100.0 * t_sum / static_cast<double>(report.segments);
    report.are_deg_per_m = kRadToDeg * r_sum / static_cast<double>(report.segments);
  }
  return report;
}

LoopClosureReport loop_closure_error(const Vec3& start, const Vec3& end) {
  const Vec3 delta = end - start;
  return {delta.x(), delta.y(), delta.z(), delta.norm()};
}

LoopClosureReport loop_closure_error(const Trajectory& estimate) {
  if (estimate.size() < 2) {
    throw Error(ErrorCode::kTrajectoryTooShort, "loop closure needs at least two poses");
  }
  return loop_closure_error(estimate.front().translation, estimate.back().translation);
}

RuntimeSummary runtime_profile(const std::vector<StageTimes>& frames) {
  if (frames.empty()) {
    throw Error(ErrorCode::kConfigError, "runtime profile needs at least one frame");
  }
  RuntimeSummary out;
  out.frames = frames.size();
  std::vector<double> totals(frames.size(), 0.0);
  for (std::size_t s = 0; s <= kStageNames.size(); ++s) {
    std::vector<double> values(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
      if (s < kStageNames.size()) {
        values[f] = frames[f][s];
        totals[f] += frames[f][s];
      } else {
        values[f] = totals[f];
      }
    }
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    out.stages.push_back({s < kStageNames.size() ? kStageNames[s] : "total", mean,
                          median(values), rank_percentile(values, 0.95)});
  }
  return out;
}

std::string format_report(const SegmentErrorReport* segments, const LoopClosureReport& loop) {
  std::ostringstream os;
  os << std::fixed;
  if (segments != nullptr) {
    os << "segments: " << segments->segments << '\n';
    os << std::setprecision(3) << "ATE: " << segments->ate_pct << " %\n";
    os << std::setprecision(4) << "ARE: " << segments->are_deg_per_m << " deg/m ("
       << segments->are_deg_per_100m() << " deg/100m)\n";
    for (const BucketError& b : segments->buckets) {
      os << std::setprecision(0) << "  " << b.length << " m: " << std::setprecision(3)
         << b.translation_pct << " % " << std::setprecision(4) << b.rotation_deg_per_m
         << " deg/m (" << b.segments << " segments)\n";
    }
  }
  os << std::setprecision(3) << "loop closure: x " << loop.x << " y " << loop.y << " z " << loop.z
     << " d " << loop.d << " m\n";
  return os.str();
}

void write_segment_csv(const std::filesystem::path& path, const SegmentErrorReport& report) {
  std::ofstream os(path);
  if (!os) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  os << "length_m,segments,translation_pct,rotation_deg_per_m\n";
  os.precision(9);
  for (const BucketError& b : report.buckets) {
    os << b.length << ',' << b.segments << ',' << b.translation_pct << ',' << b.rotation_deg_per_m
       << '\n';
  }
  os << "all," << report.segments << ',' << report.ate_pct << ',' << report.are_deg_per_m << '\n';
}

}  // namespace lilo
