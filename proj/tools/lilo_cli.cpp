// Command-line driver: run, eval, dump-sri, dump-features.

#include <CLI11.hpp>

#include <iostream>

#include "lilo/pipeline.hpp"

namespace {

constexpr int kExitFatal = 1;
constexpr int kExitEvalParse = 2;

struct SceneOptions {
  std::string profile = "hdl64";
  std::string config;
  int resolution = 0;
};

lilo::SensorProfile parse_profile(const std::string& name) {
  return name == "vlp16" ? lilo::SensorProfile::kVlp16 : lilo::SensorProfile::kHdl64;
}

void add_scene_options(CLI::App* cmd, SceneOptions& opts) {
  cmd->add_option("--profile", opts.profile, "Sensor preset")
      ->check(CLI::IsMember({"hdl64", "vlp16"}));
  cmd->add_option("--config", opts.config, "key = value configuration file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--resolution", opts.resolution, "Image width")
      ->check(CLI::IsMember({360, 720, 1024}));
}

lilo::RunManifest manifest_from(const SceneOptions& opts) {
  lilo::RunManifest m;
  m.profile = parse_profile(opts.profile);
  if (!opts.config.empty()) m.config = opts.config;
  if (opts.resolution > 0) m.resolution = opts.resolution;
  return m;
}

lilo::FrameFeatures features_of(const std::string& bin, const SceneOptions& opts) {
  const lilo::PipelineConfig cfg = lilo::resolve_config(manifest_from(opts));
  return lilo::extract_features(lilo::read_velodyne_bin(bin), cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR odometry on spherical range images"};
  app.require_subcommand(1);

  SceneOptions run_scene;
  std::string run_input, run_output, run_features;
  bool dump_sri = false, dump_features = false;
  auto* run = app.add_subcommand("run", "Estimate a trajectory from a directory of .bin scans");
  run->add_option("--input", run_input, "Directory of velodyne .bin files")->required();
  run->add_option("--output", run_output, "Output directory")->required();
  add_scene_options(run, run_scene);
  run->add_option("--features", run_features, "Plane-term feature group")
      ->check(CLI::IsMember({"EG", "ES", "EGS"}));
  run->add_flag("--dump-sri", dump_sri, "Write PGM range and feature images per frame");
  run->add_flag("--dump-features", dump_features, "Write PLY feature clouds per frame");

  std::string estimate, truth, report_dir;
  bool short_ladder = false;
  auto* eval = app.add_subcommand("eval", "Compare an estimated trajectory with ground truth");
  eval->add_option("--estimate", estimate, "KITTI pose file")->required();
  eval->add_option("--truth", truth, "KITTI pose file")->required();
  eval->add_flag("--short-ladder", short_ladder, "Use 10/20/50 m segments (not KITTI)");
  eval->add_option("--report-dir", report_dir, "Also write report.txt and segments.csv here");

  SceneOptions dump_scene;
  std::string dump_in, dump_out;
  auto* sri = app.add_subcommand("dump-sri", "Write the range image of one scan as PGM");
  sri->add_option("--input", dump_in, "Velodyne .bin file")->required();
  sri->add_option("--output", dump_out, "PGM path")->required();
  add_scene_options(sri, dump_scene);
  auto* feat = app.add_subcommand("dump-features", "Write the feature clouds of one scan as PLY");
  feat->add_option("--input", dump_in, "Velodyne .bin file")->required();
  feat->add_option("--output", dump_out, "PLY path")->required();
  add_scene_options(feat, dump_scene);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      lilo::RunManifest m = manifest_from(run_scene);
      m.input = run_input;
      m.output = run_output;
      if (!run_features.empty()) m.features = lilo::parse_feature_group(run_features);
      m.dump_sri = dump_sri;
      m.dump_features = dump_features;
      const lilo::RunResult r = lilo::run_odometry(m, std::cerr);
      if (!r.timings.empty()) {
        const lilo::RuntimeSummary s = lilo::runtime_profile(r.timings);
        std::cout << r.trajectory.size() << " poses written, " << r.skipped_frames
                  << " frames skipped, mean " << s.total().mean_ms << " ms/frame\n";
      } else {
        std::cout << "0 poses written\n";
      }
    } else if (*eval) {
      lilo::EvalOptions opts;
      opts.short_ladder = short_ladder;
      if (!report_dir.empty()) opts.report_dir = report_dir;
      try {
        std::cout << lilo::run_eval(estimate, truth, opts).text;
      } catch (const lilo::Error& e) {
        if (e.code() != lilo::ErrorCode::kMalformedPoseLine) throw;
        std::cerr << "error: " << e.what() << '\n';
        return kExitEvalParse;
      }
    } else if (*sri) {
      const lilo::FrameFeatures f = features_of(dump_in, dump_scene);
      lilo::write_pgm(dump_out, lilo::normalize_to_gray(f.image).value);
    } else if (*feat) {
      lilo::write_feature_ply(dump_out, features_of(dump_in, dump_scene).clouds);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFatal;
  }
  return 0;
}
