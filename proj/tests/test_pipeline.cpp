#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "lilo/pipeline.hpp"
#include "scene.hpp"

using namespace lilo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("lilo_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

const PointCloud& street_frame() {
  static const PointCloud cloud = [] {
    const sim::Scene scene = sim::loop_scene(100.0, 50.0, 7);
    return sim::scan(scene, make_pose(Mat3::Identity(), Vec3(0, -25, 0)), Twist{},
                     sim::LidarModel::hdl64());
  }();
  return cloud;
}

void write_frames(const fs::path& dir, int count) {
  fs::create_directories(dir);
  for (int k = 0; k < count; ++k) {
    std::ostringstream name;
    name << std::setw(6) << std::setfill('0') << k << ".bin";
    write_velodyne_bin(dir / name.str(), street_frame());
  }
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LILO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("empty input directory") {
    TempDir dir("empty");
    fs::create_directories(dir.path / "in");
    RunManifest m;
    m.input = dir.path / "in";
    m.output = dir.path / "out";
    std::ostringstream log;
    const RunResult r = run_odometry(m, log);
    CHECK(r.trajectory.empty());
    CHECK(fs::exists(m.output / "poses.txt"));
    CHECK(fs::file_size(m.output / "poses.txt") == 0);
    CHECK(log.str().find("warning") != std::string::npos);
  }

  TEST_CASE("identical frames stay at the origin and runs are deterministic") {
    TempDir dir("identical");
    write_frames(dir.path / "in", 3);
    RunManifest m;
    m.input = dir.path / "in";
    m.output = dir.path / "a";
    m.dump_sri = true;
    m.dump_features = true;
    std::ostringstream log;
    const RunResult r = run_odometry(m, log);
    REQUIRE(r.trajectory.size() == 3);
    CHECK(r.skipped_frames == 0);
    for (const PoseSE3& p : r.trajectory) {
      CHECK(p.translation.norm() < 1e-3);
      CHECK(so3_log(p.rotation).norm() < 1e-4);
    }
    CHECK(fs::exists(m.output / "sri" / "000000.pgm"));
    CHECK(fs::exists(m.output / "features" / "000002.ply"));
    const std::string timings = slurp(m.output / "timings.csv");
    CHECK(timings.rfind("frame,projection,filtering,reconstruction,association,optimization,"
                        "map_update,total\n",
                        0) == 0);

    RunManifest again = m;
    again.output = dir.path / "b";
    again.dump_sri = again.dump_features = false;
    run_odometry(again, log);
    CHECK(slurp(m.output / "poses.txt") == slurp(again.output / "poses.txt"));
  }

  TEST_CASE("a malformed frame is skipped") {
    TempDir dir("malformed");
    write_frames(dir.path / "in", 3);
    write_text(dir.path / "in" / "000001.bin", "not a multiple of sixteen");
    RunManifest m;
    m.input = dir.path / "in";
    m.output = dir.path / "out";
    std::ostringstream log;
    const RunResult r = run_odometry(m, log);
    CHECK(r.trajectory.size() == 3);
    CHECK(r.skipped_frames == 1);
    CHECK(log.str().find("frame 1 skipped") != std::string::npos);
    CHECK(read_kitti_poses(m.output / "poses.txt").size() == 3);
  }

  TEST_CASE("configuration precedence") {
    TempDir dir("precedence");
    RunManifest m;
    m.profile = SensorProfile::kVlp16;
    CHECK(resolve_config(m).filter_path == FilterPath::kFft);
    CHECK(resolve_config(m).odom.feature_group == FeatureGroup::kES);

    write_text(dir.path / "c.cfg", "sri.width = 360\nodom.feature_group = EG\n");
    m.config = dir.path / "c.cfg";
    CHECK(resolve_config(m).sri.width == 360);
    CHECK(resolve_config(m).odom.feature_group == FeatureGroup::kEG);
    CHECK(resolve_config(m).filter_path == FilterPath::kFft);

    m.resolution = 1024;
    m.features = FeatureGroup::kEGS;
    CHECK(resolve_config(m).sri.width == 1024);
    CHECK(resolve_config(m).odom.feature_group == FeatureGroup::kEGS);
  }

  TEST_CASE("evaluation driver") {
    TempDir dir("eval");
    Trajectory t;
    for (int k = 0; k < 200; ++k) t.push_back(make_pose(rot_z(0.001 * k), Vec3(0.9 * k, 0, 0)));
    write_kitti_poses(t, dir.path / "a.txt");
    write_kitti_poses(t, dir.path / "b.txt");

    EvalOptions opts;
    opts.report_dir = dir.path / "report";
    const EvalResult r = run_eval(dir.path / "a.txt", dir.path / "b.txt", opts);
    REQUIRE(r.segments.has_value());
    CHECK(r.text.find("ATE: 0.000 %") != std::string::npos);
    CHECK(r.text.find("ARE: 0.0000 deg/m") != std::string::npos);
    CHECK(fs::exists(dir.path / "report" / "report.txt"));
    CHECK(fs::exists(dir.path / "report" / "segments.csv"));

    Trajectory shorter(t.begin(), t.begin() + 40);
    write_kitti_poses(shorter, dir.path / "s.txt");
    const EvalResult s = run_eval(dir.path / "s.txt", dir.path / "s.txt");
    CHECK_FALSE(s.segments.has_value());
    opts.short_ladder = true;
    const EvalResult l = run_eval(dir.path / "s.txt", dir.path / "s.txt", opts);
    CHECK(l.segments.has_value());
    CHECK(l.text.rfind("ladder:", 0) == 0);

    CHECK_THROWS_AS(run_eval(dir.path / "a.txt", dir.path / "s.txt"), lilo::Error);
  }

  TEST_CASE("command line exit codes") {
    TempDir dir("exit");
    Trajectory t(150, PoseSE3::identity());
    for (int k = 0; k < 150; ++k) t[k].translation.x() = k;
    write_kitti_poses(t, dir.path / "good.txt");
    write_text(dir.path / "bad.txt", "1 0 0\n");
    fs::create_directories(dir.path / "in");
    const std::string d = dir.path.string();

    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("eval --estimate " + d + "/good.txt --truth " + d + "/good.txt") == 0);
    CHECK(run_cli("eval --estimate " + d + "/bad.txt --truth " + d + "/good.txt") == 2);
    CHECK(run_cli("eval --estimate " + d + "/missing.txt --truth " + d + "/good.txt") != 0);
    CHECK(run_cli("run --input " + d + "/in --output " + d + "/out") == 0);
    write_text(dir.path / "bad.cfg", "no.such.key = 1\n");
    CHECK(run_cli("run --input " + d + "/in --output " + d + "/out --config " + d + "/bad.cfg") ==
          1);
    CHECK(run_cli("run --input " + d + "/in --output " + d + "/out --resolution 500") != 0);
  }
}
