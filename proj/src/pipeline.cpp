#include "lilo/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <ostream>

namespace lilo {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

enum Stage : std::size_t {
  kProjection,
  kFiltering,
  kReconstruction,
  kAssociation,
  kOptimization,
  kMapUpdate
};

std::string frame_name(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06zu", k);
  return buf;
}

void dump_frame(const std::filesystem::path& out, std::size_t k, const FrameFeatures& f,
                bool sri, bool features) {
  namespace fs = std::filesystem;
  const std::string name = frame_name(k);
  if (sri) {
    fs::create_directories(out / "sri");
    write_pgm(out / "sri" / (name + ".pgm"), normalize_to_gray(f.image).value);
    const GrayImage gray = normalize_to_gray(f.image);
    const auto dump_class = [&](const FeatureImage& img, const char* suffix) {
      Grid<double> g(img.range.rows(), img.range.cols(), 0.0);
      for (std::size_t c = 0; c < g.size(); ++c) {
        if (img.valid.data()[c]) g.data()[c] = gray.value.data()[c];
      }
      write_pgm(out / "sri" / (name + suffix), g);
    };
    dump_class(f.images.edge, "_edge.pgm");
    dump_class(f.images.surface, "_surface.pgm");
    dump_class(f.images.ground, "_ground.pgm");
  }
  if (features) {
    fs::create_directories(out / "features");
    write_feature_ply(out / "features" / (name + ".ply"), f.clouds);
  }
}

}  // namespace

FrameFeatures extract_features(const PointCloud& cloud, const PipelineConfig& cfg,
                               StageTimes* times, Exec exec) {
  FrameFeatures out;
  auto t0 = Clock::now();
  ProjectionResult projected = project(cloud, cfg.sri, exec);
  out.projection = projected.stats;
  out.image = cfg.sri.interpolation_factor > 1
                  ? interpolate_rows(projected.image, cfg.sri.interpolation_factor,
                                     cfg.sri.interp_max_gap)
                  : std::move(projected.image);
  if (times != nullptr) (*times)[kProjection] += elapsed_ms(t0);

  t0 = Clock::now();
  out.images = cfg.filter_path == FilterPath::kSobel ? segment_sobel(out.image, cfg.sobel, exec)
                                                     : segment_frequency(out.image, cfg.sobel, exec);
  if (times != nullptr) (*times)[kFiltering] += elapsed_ms(t0);

  t0 = Clock::now();
  out.clouds = reconstruct_features(out.images, exec);
  out.downsampled = voxel_downsample(out.clouds, cfg.voxel, exec);
  if (times != nullptr) (*times)[kReconstruction] += elapsed_ms(t0);
  return out;
}

Pipeline::Pipeline(PipelineConfig cfg, Exec exec)
    : cfg_(std::move(cfg)), exec_(exec), odometry_(cfg_.odom, exec) {
  cfg_.validate();
}

PoseSE3 Pipeline::process(const PointCloud& cloud, double dt, StageTimes* times) {
  last_ = extract_features(cloud, cfg_, times, exec_);
  last_result_ = odometry_.process(last_.downsampled, dt);
  if (times != nullptr) {
    (*times)[kAssociation] += last_result_.estimate.association_ms;
    (*times)[kOptimization] += last_result_.estimate.optimization_ms;
    (*times)[kMapUpdate] += last_result_.map_update_ms;
  }
  return last_result_.pose;
}

PipelineConfig resolve_config(const RunManifest& manifest) {
  PipelineConfig cfg = profile_defaults(manifest.profile);
  if (manifest.config) cfg = load_config(*manifest.config, cfg);
  if (manifest.resolution) cfg.sri.width = *manifest.resolution;
  if (manifest.features) cfg.odom.feature_group = *manifest.features;
  cfg.validate();
  return cfg;
}

void write_timings_csv(const std::filesystem::path& path, const std::vector<StageTimes>& timings) {
  std::ofstream os(path);
  if (!os) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  os << "frame";
  for (const char* name : kStageNames) os << ',' << name;
  os << ",total\n";
  os.precision(6);
  for (std::size_t k = 0; k < timings.size(); ++k) {
    os << k;
    double total = 0.0;
    for (const double t : timings[k]) {
      os << ',' << t;
      total += t;
    }
    os << ',' << total << '\n';
  }
}

RunResult run_odometry(const RunManifest& manifest, std::ostream& log) {
  const PipelineConfig cfg = resolve_config(manifest);
  const FrameSource source(manifest.input);
  std::filesystem::create_directories(manifest.output);

  log << "profile " << to_string(manifest.profile) << ", filter " << to_string(cfg.filter_path)
      << ", image " << cfg.sri.height() << "x" << cfg.sri.width << ", features "
      << to_string(cfg.odom.feature_group) << ", " << source.size() << " frames\n";
  if (source.size() == 0) log << "warning: no .bin frames in " << manifest.input << '\n';

  Pipeline pipeline(cfg);
  RunResult result;
  std::optional<double> previous_stamp;

  const auto load = [&source](std::size_t k) { return source.load(k); };
  std::future<PointCloud> next;
  if (source.size() > 0) next = std::async(std::launch::async, load, 0);

  for (std::size_t k = 0; k < source.size(); ++k) {
    std::future<PointCloud> current = std::move(next);
    if (k + 1 < source.size()) next = std::async(std::launch::async, load, k + 1);

    double dt = cfg.odom.default_dt;
    if (const auto stamp = source.timestamp(k)) {
      if (previous_stamp && *stamp > *previous_stamp) dt = *stamp - *previous_stamp;
      previous_stamp = stamp;
    }

    StageTimes times{};
    PoseSE3 pose;
    try {
      const PointCloud cloud = current.get();
      pose = pipeline.process(cloud, dt, &times);
      if (manifest.dump_sri || manifest.dump_features) {
        dump_frame(manifest.output, k, pipeline.last_features(), manifest.dump_sri,
                   manifest.dump_features);
      }
      if (pipeline.last_result().estimate.status == EstimateStatus::kInsufficientConstraints) {
        log << "frame " << k << ": insufficient constraints, using prediction\n";
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kIoError && !std::filesystem::exists(source.path(k))) throw;
      log << "frame " << k << " skipped: " << e.what() << '\n';
      pose = pipeline.coast(dt);
      ++result.skipped_frames;
    }
    result.trajectory.push_back(pose);
    result.timings.push_back(times);
  }

  write_kitti_poses(result.trajectory, manifest.output / "poses.txt");
  write_timings_csv(manifest.output / "timings.csv", result.timings);
  return result;
}

EvalResult run_eval(const std::filesystem::path& estimate, const std::filesystem::path& truth,
                    const EvalOptions& options) {
  const Trajectory est = read_kitti_poses(estimate);
  const Trajectory gt = read_kitti_poses(truth);
  if (est.size() != gt.size()) {
    throw Error(ErrorCode::kConfigError, "trajectory lengths differ: " + std::to_string(est.size()) +
                                             " vs " + std::to_string(gt.size()));
  }
  EvalResult out;
  SegmentOptions seg;
  if (options.short_ladder) seg.lengths = kShortLengths;
  try {
    out.segments = segment_errors(est, gt, seg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kTrajectoryTooShort) throw;
  }
  if (est.size() >= 2) out.loop = loop_closure_error(est);
  out.text = format_report(out.segments ? &*out.segments : nullptr, out.loop);
  if (!out.segments) out.text = "segments: none (path shorter than the smallest length)\n" + out.text;
  if (options.short_ladder) out.text = "ladder: 10/20/50 m (not KITTI)\n" + out.text;

  if (options.report_dir) {
    std::filesystem::create_directories(*options.report_dir);
    std::ofstream os(*options.report_dir / "report.txt");
    if (!os) throw Error(ErrorCode::kIoError, "cannot write report in " + options.report_dir->string());
    os << out.text;
    if (out.segments) write_segment_csv(*options.report_dir / "segments.csv", *out.segments);
  }
  return out;
}

}  // namespace lilo
