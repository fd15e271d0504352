#include "lilo/sri.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace lilo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum CellStatus : std::int64_t { kBelowMinRange = -1, kOutsideFov = -2 };

}  // namespace

void SriParams::validate() const {
  if (width <= 0 || n_beams <= 0 || interpolation_factor < 1) {
    throw Error(ErrorCode::kConfigError, "sri width, n_beams and interpolation_factor must be positive");
  }
  if (!(fov_min < fov_max)) {
    throw Error(ErrorCode::kConfigError, "sri.fov_min must be below sri.fov_max");
  }
  if (!(min_range >= 0.0) || !(interp_max_gap > 0.0)) {
    throw Error(ErrorCode::kConfigError, "sri.min_range must be >= 0 and sri.interp_max_gap > 0");
  }
}

std::size_t SphericalRangeImage::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.data().begin(), valid.data().end(), 1));
}

SphericalCoords spherical_coords(const Vec3& p) {
  const double r = p.norm();
  if (!(r > 0.0)) {
    throw Error(ErrorCode::kDegeneratePoint, "zero-range point");
  }
  return {r, std::atan2(p.y(), p.x()), std::asin(std::clamp(p.z() / r, -1.0, 1.0))};
}

ProjectionResult project(const PointCloud& cloud, const SriParams& params, Exec exec) {
  params.validate();
  const int rows = params.n_beams;
  const int cols = params.width;
  const double x_res = params.x_res();
  const double y_res = params.y_res();
  const auto n = static_cast<std::int64_t>(cloud.points.size());

  std::vector<std::int64_t> cell(cloud.points.size());
  std::vector<double> ranges(cloud.points.size());

#pragma omp parallel for schedule(static) if (exec == Exec::kParallel)
  for (std::int64_t k = 0; k < n; ++k) {
    const Vec3& p = cloud.points[k];
    const double r = p.norm();
    ranges[k] = r;
    if (!(r >= params.min_range) || r == 0.0) {
      cell[k] = kBelowMinRange;
      continue;
    }
    const double elevation = std::asin(std::clamp(p.z() / r, -1.0, 1.0));
    if (elevation < params.fov_min || elevation > params.fov_max) {
      cell[k] = kOutsideFov;
      continue;
    }
    double shifted_az = std::numbers::pi - std::atan2(p.y(), p.x());
    if (shifted_az >= kTwoPi) shifted_az -= kTwoPi;
    const int j = std::clamp(static_cast<int>(std::floor(shifted_az * x_res)), 0, cols - 1);
    const int i = std::clamp(static_cast<int>(std::floor((params.fov_max - elevation) * y_res)),
                             0, rows - 1);
    cell[k] = static_cast<std::int64_t>(i) * cols + j;
  }

  ProjectionResult result{SphericalRangeImage(rows, cols), {}};
  auto& img = result.image;
  auto& stats = result.stats;
  for (std::int64_t k = 0; k < n; ++k) {
    if (cell[k] == kBelowMinRange) {
      ++stats.below_min_range;
      continue;
    }
    if (cell[k] == kOutsideFov) {
      ++stats.outside_fov;
      continue;
    }
    ++stats.projected;
    const auto c = static_cast<std::size_t>(cell[k]);
    if (img.valid.data()[c]) {
      ++stats.collisions;
      if (!(ranges[k] < img.range.data()[c])) continue;
    }
    img.valid.data()[c] = 1;
    img.range.data()[c] = ranges[k];
    img.z_map.data()[c] = cloud.points[k].z();
  }
  return result;
}

SphericalRangeImage interpolate_rows(const SphericalRangeImage& img, int factor, double max_gap) {
  if (factor < 1) {
    throw Error(ErrorCode::kConfigError, "interpolation factor must be >= 1");
  }
  if (factor == 1) return img;
  const int rows = img.rows();
  const int cols = img.cols();
  SphericalRangeImage out(rows * factor, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      out.range(i * factor, j) = img.range(i, j);
      out.z_map(i * factor, j) = img.z_map(i, j);
      out.valid(i * factor, j) = img.valid(i, j);
    }
    if (i + 1 >= rows) continue;
    for (int j = 0; j < cols; ++j) {
      if (!img.valid(i, j) || !img.valid(i + 1, j)) continue;
      const double r0 = img.range(i, j);
      const double r1 = img.range(i + 1, j);
      if (!(std::abs(r1 - r0) < max_gap)) continue;
      const double z0 = img.z_map(i, j);
      const double z1 = img.z_map(i + 1, j);
      for (int s = 1; s < factor; ++s) {
        const double w = static_cast<double>(s) / factor;
        out.range(i * factor + s, j) = (1.0 - w) * r0 + w * r1;
        out.z_map(i * factor + s, j) = (1.0 - w) * z0 + w * z1;
        out.valid(i * factor + s, j) = 1;
      }
    }
  }
  return out;
}

GrayImage normalize_to_gray(const SphericalRangeImage& img) {
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (std::size_t c = 0; c < img.range.size(); ++c) {
    if (!img.valid.data()[c]) continue;
    const double r = img.range.data()[c];
    if (!any) {
      lo = hi = r;
      any = true;
    } else {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  if (!any) {
    throw Error(ErrorCode::kEmptyImage, "no valid pixel to normalize");
  }
  GrayImage gray{Grid<double>(img.rows(), img.cols(), 0.0), lo, hi};
  const double span = hi - lo;
  if (span > 0.0) {
    for (std::size_t c = 0; c < img.range.size(); ++c) {
      if (img.valid.data()[c]) gray.value.data()[c] = (img.range.data()[c] - lo) / span;
    }
  }
  return gray;
}

Grid<double> denormalize(const GrayImage& gray, const Mask& valid) {
  Grid<double> out(gray.value.rows(), gray.value.cols(), 0.0);
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (valid.data()[c]) out.data()[c] = gray.denormalize(gray.value.data()[c]);
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const Grid<double>& gray) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  os << "P5\n" << gray.cols() << ' ' << gray.rows() << "\n255\n";
  std::vector<unsigned char> bytes(gray.size());
  for (std::size_t c = 0; c < gray.size(); ++c) {
    const double v = std::clamp(gray.data()[c], 0.0, 1.0);
    bytes[c] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) {
    throw Error(ErrorCode::kIoError, "write failed for " + path.string());
  }
}

}  // namespace lilo
