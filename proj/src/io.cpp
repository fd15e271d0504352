#include "lilo/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace lilo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

static_assert(std::endian::native == std::endian::little,
              "velodyne records are read as native little-endian floats");

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw Error(ErrorCode::kConfigError, key + ": expected a number, got '" + value + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  int out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::kConfigError, key + ": expected an integer, got '" + value + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error(ErrorCode::kConfigError, key + ": expected true/false, got '" + value + "'");
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

template <typename Section, typename Field>
Setter number(Section PipelineConfig::*section, Field Section::*field) {
  return [section, field](PipelineConfig& c, const std::string& k, const std::string& v) {
    if constexpr (std::is_same_v<Field, int>) {
      c.*section.*field = to_int(k, v);
    } else if constexpr (std::is_same_v<Field, bool>) {
      c.*section.*field = to_bool(k, v);
    } else {
      c.*section.*field = to_double(k, v);
    }
  };
}

template <typename Section>
Setter degrees(Section PipelineConfig::*section, double Section::*field) {
  return [section, field](PipelineConfig& c, const std::string& k, const std::string& v) {
    c.*section.*field = to_double(k, v) * kDegToRad;
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  using P = PipelineConfig;
  static const std::map<std::string, Setter, std::less<>> table = {
      {"sri.width", number(&P::sri, &SriParams::width)},
      {"sri.n_beams", number(&P::sri, &SriParams::n_beams)},
      {"sri.fov_min", number(&P::sri, &SriParams::fov_min)},
      {"sri.fov_max", number(&P::sri, &SriParams::fov_max)},
      {"sri.fov_min_deg", degrees(&P::sri, &SriParams::fov_min)},
      {"sri.fov_max_deg", degrees(&P::sri, &SriParams::fov_max)},
      {"sri.interpolation_factor", number(&P::sri, &SriParams::interpolation_factor)},
      {"sri.min_range", number(&P::sri, &SriParams::min_range)},
      {"sri.interp_max_gap", number(&P::sri, &SriParams::interp_max_gap)},
      {"filter.path",
       [](P& c, const std::string& k, const std::string& v) {
         if (v == "sobel") {
           c.filter_path = FilterPath::kSobel;
         } else if (v == "fft") {
           c.filter_path = FilterPath::kFft;
         } else {
           throw Error(ErrorCode::kConfigError, k + ": expected sobel|fft, got '" + v + "'");
         }
       }},
      {"filter.edge_threshold", number(&P::sobel, &SobelConfig::edge_threshold)},
      {"filter.ground_threshold", number(&P::sobel, &SobelConfig::ground_threshold)},
      {"filter.ground_z_max", number(&P::sobel, &SobelConfig::ground_z_max)},
      {"filter.fft_ground_eps", number(&P::sobel, &SobelConfig::fft_ground_eps)},
      {"voxel.leaf_edge", number(&P::voxel, &VoxelConfig::leaf_edge)},
      {"voxel.leaf_surface", number(&P::voxel, &VoxelConfig::leaf_surface)},
      {"voxel.leaf_ground", number(&P::voxel, &VoxelConfig::leaf_ground)},
      {"odom.neighbor_radius", number(&P::odom, &OdomConfig::neighbor_radius)},
      {"odom.min_neighbors", number(&P::odom, &OdomConfig::min_neighbors)},
      {"odom.max_neighbors", number(&P::odom, &OdomConfig::max_neighbors)},
      {"odom.max_gn_iterations", number(&P::odom, &OdomConfig::max_gn_iterations)},
      {"odom.convergence_eps", number(&P::odom, &OdomConfig::convergence_eps)},
      {"odom.huber_delta", number(&P::odom, &OdomConfig::huber_delta)},
      {"odom.map_trim_radius", number(&P::odom, &OdomConfig::map_trim_radius)},
      {"odom.line_ratio", number(&P::odom, &OdomConfig::line_ratio)},
      {"odom.plane_flatness", number(&P::odom, &OdomConfig::plane_flatness)},
      {"odom.plane_min_spread", number(&P::odom, &OdomConfig::plane_min_spread)},
      {"odom.plane_max_mean_distance", number(&P::odom, &OdomConfig::plane_max_mean_distance)},
      {"odom.min_correspondences", number(&P::odom, &OdomConfig::min_correspondences)},
      {"odom.map_leaf_edge", number(&P::odom, &OdomConfig::map_leaf_edge)},
      {"odom.map_leaf_surface", number(&P::odom, &OdomConfig::map_leaf_surface)},
      {"odom.default_dt", number(&P::odom, &OdomConfig::default_dt)},
      {"odom.undistort", number(&P::odom, &OdomConfig::undistort)},
      {"odom.feature_group",
       [](P& c, const std::string& k, const std::string& v) {
         const auto group = parse_feature_group(v);
         if (!group) {
           throw Error(ErrorCode::kConfigError, k + ": expected EG|ES|EGS, got '" + v + "'");
         }
         c.odom.feature_group = *group;
       }},
  };
  return table;
}

}  // namespace

std::string_view to_string(SensorProfile profile) {
  return profile == SensorProfile::kHdl64 ? "hdl64" : "vlp16";
}

std::string_view to_string(FilterPath path) {
  return path == FilterPath::kSobel ? "sobel" : "fft";
}

void PipelineConfig::validate() const {
  sri.validate();
  sobel.validate();
  voxel.validate();
  odom.validate();
  if (filter_path == FilterPath::kFft && sri.width % 2 != 0) {
    throw Error(ErrorCode::kConfigError, "sri.width must be even for filter.path = fft");
  }
}

PipelineConfig profile_defaults(SensorProfile profile) {
  PipelineConfig cfg;
  if (profile == SensorProfile::kVlp16) {
    cfg.sri.n_beams = 16;
    cfg.sri.interpolation_factor = 2;
    cfg.sri.fov_min = -15.0 * kDegToRad;
    cfg.sri.fov_max = 15.0 * kDegToRad;
    cfg.filter_path = FilterPath::kFft;
    cfg.odom.feature_group = FeatureGroup::kES;
  }
  return cfg;
}

PointCloud read_velodyne_bin(const std::filesystem::path& path, ReadStats* stats) {
  std::ifstream is(path, std::ios::binary | std::ios::ate);
  if (!is) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  const std::streamoff size = is.tellg();
  if (size < 0) {
    throw Error(ErrorCode::kIoError, "cannot size " + path.string());
  }
  if (size % 16 != 0) {
    throw Error(ErrorCode::kMalformedFrame,
                path.string() + ": " + std::to_string(size) + " bytes is not a multiple of 16");
  }
  const auto records = static_cast<std::size_t>(size / 16);
  std::vector<float> raw(records * 4);
  is.seekg(0);
  if (records > 0 && !is.read(reinterpret_cast<char*>(raw.data()), size)) {
    throw Error(ErrorCode::kIoError, "short read on " + path.string());
  }
  PointCloud cloud;
  cloud.points.reserve(records);
  cloud.intensity.reserve(records);
  std::size_t dropped = 0;
  for (std::size_t k = 0; k < records; ++k) {
    const float* r = &raw[4 * k];
    if (!std::isfinite(r[0]) || !std::isfinite(r[1]) || !std::isfinite(r[2]) ||
        !std::isfinite(r[3])) {
      ++dropped;
      continue;
    }
    cloud.points.emplace_back(r[0], r[1], r[2]);
    cloud.intensity.push_back(r[3]);
  }
  if (stats != nullptr) {
    stats->records += records;
    stats->dropped_non_finite += dropped;
  }
  return cloud;
}

void write_velodyne_bin(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  const bool with_intensity = cloud.intensity.size() == cloud.points.size();
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    const float rec[4] = {static_cast<float>(cloud.points[k].x()),
                          static_cast<float>(cloud.points[k].y()),
                          static_cast<float>(cloud.points[k].z()),
                          with_intensity ? cloud.intensity[k] : 0.0f};
    os.write(reinterpret_cast<const char*>(rec), sizeof(rec));
  }
  if (!os) {
    throw Error(ErrorCode::kIoError, "write failed for " + path.string());
  }
}

std::string format_kitti_pose(const PoseSE3& pose) {
  std::ostringstream os;
  os.precision(9);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      double v = c < 3 ? pose.rotation(r, c) : pose.translation(r);
      if (v == 0.0) v = 0.0;  // no "-0"
      if (r != 0 || c != 0) os << ' ';
      os << v;
    }
  }
  return os.str();
}

void write_kitti_poses(const Trajectory& trajectory, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  for (const PoseSE3& pose : trajectory) os << format_kitti_pose(pose) << '\n';
  if (!os) {
    throw Error(ErrorCode::kIoError, "write failed for " + path.string());
  }
}

Trajectory read_kitti_poses(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  Trajectory out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    std::vector<double> values;
    std::string token;
    while (ls >> token) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::kMalformedPoseLine,
                    path.string() + ":" + std::to_string(line_no) + ": bad number '" + token + "'");
      }
      values.push_back(v);
    }
    if (values.size() != 12) {
      throw Error(ErrorCode::kMalformedPoseLine,
                  path.string() + ":" + std::to_string(line_no) + ": expected 12 fields, got " +
                      std::to_string(values.size()));
    }
    PoseSE3 pose;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) pose.rotation(r, c) = values[4 * r + c];
      pose.translation(r) = values[4 * r + 3];
    }
    if (orthonormality_error(pose.rotation) > 1e-6) {
      pose.rotation = orthonormalize(pose.rotation);
    }
    out.push_back(pose);
  }
  return out;
}

void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) {
    throw Error(ErrorCode::kConfigError, "unknown key '" + key + "'");
  }
  it->second(cfg, key, value);
}

PipelineConfig parse_config(const std::string& text, PipelineConfig base) {
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigError,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    set_config_value(base, trim(std::string_view(content).substr(0, eq)),
                     trim(std::string_view(content).substr(eq + 1)));
  }
  base.validate();
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream is(path);
  if (!is) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

FrameSource::FrameSource(const std::filesystem::path& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) {
    throw Error(ErrorCode::kIoError, directory.string() + " is not a directory");
  }
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") {
      files_.push_back(entry.path());
    }
  }
  std::sort(files_.begin(), files_.end());

  for (const fs::path& candidate : {directory / "times.txt", directory.parent_path() / "times.txt"}) {
    std::ifstream is(candidate);
    if (!is) continue;
    std::vector<double> times;
    double t = 0.0;
    while (is >> t) times.push_back(t);
    if (times.size() == files_.size()) {
      times_ = std::move(times);
      break;
    }
  }
}

std::optional<double> FrameSource::timestamp(std::size_t k) const {
  if (k < times_.size()) return times_[k];
  return std::nullopt;
}

PointCloud FrameSource::load(std::size_t k, ReadStats* stats) const {
  return read_velodyne_bin(files_.at(k), stats);
}

}  // namespace lilo
