#pragma once

#include <filesystem>
#include <numbers>

#include "lilo/common.hpp"
#include "lilo/point_cloud.hpp"

namespace lilo {

/// Spherical range image geometry.
///
/// Columns cover the full turn: a point with azimuth θ ∈ (−π, π] is shifted to
/// θ' = π − θ ∈ [0, 2π) and lands in column floor(θ' · x_res). Column j thus
/// starts at azimuth π − 2πj/N, which is what reconstruction inverts.
///
/// Rows cover the vertical field of view top-down: φ' = fov_max − φ, row
/// floor(φ' · y_res) with y_res = n_beams / (fov_max − fov_min). Projection
/// produces n_beams rows; `interpolate_rows` multiplies that by
/// `interpolation_factor`.
struct SriParams {
  int width = 720;
  int n_beams = 64;
  double fov_min = -24.8 * std::numbers::pi / 180.0;
  double fov_max = 2.0 * std::numbers::pi / 180.0;
  int interpolation_factor = 1;
  double min_range = 0.5;
  double interp_max_gap = 1.0;

  int height() const noexcept { return n_beams * interpolation_factor; }
  double x_res() const noexcept { return width / (2.0 * std::numbers::pi); }
  double y_res() const noexcept { return n_beams / (fov_max - fov_min); }

  /// Throws Error(kConfigError) on inconsistent values.
  void validate() const;
};

struct SphericalRangeImage {
  Grid<double> range;  // meters, 0 where invalid
  Grid<double> z_map;  // z of the point that won the cell
  Mask valid;

  SphericalRangeImage() = default;
  SphericalRangeImage(int rows, int cols)
      : range(rows, cols, 0.0), z_map(rows, cols, 0.0), valid(rows, cols, 0) {}

  int rows() const noexcept { return range.rows(); }
  int cols() const noexcept { return range.cols(); }
  std::size_t valid_count() const;
};

struct SphericalCoords {
  double range;
  double azimuth;    // (−π, π]
  double elevation;  // (−π/2, π/2)
};

/// Throws Error(kDegeneratePoint) for the origin.
SphericalCoords spherical_coords(const Vec3& p);

struct ProjectionStats {
  std::size_t projected = 0;
  std::size_t below_min_range = 0;
  std::size_t outside_fov = 0;
  std::size_t collisions = 0;  // points that lost a cell to a nearer one
};

struct ProjectionResult {
  SphericalRangeImage image;
  ProjectionStats stats;
};

/// Nearest return wins on collisions; ties keep the lower point index.
/// The per-point angle work runs under OpenMP, the cell selection is a
/// sequential scatter, so the output is identical for both policies.
ProjectionResult project(const PointCloud& cloud, const SriParams& params,
                         Exec exec = Exec::kParallel);

/// Inserts factor − 1 rows between every pair of source rows. Rows after the
/// last source row have no lower neighbor and stay invalid.
SphericalRangeImage interpolate_rows(const SphericalRangeImage& img, int factor,
                                     double max_gap);

/// Valid ranges mapped linearly onto [0, 1]; invalid pixels are 0.
struct GrayImage {
  Grid<double> value;
  double min_range = 0.0;
  double max_range = 0.0;

  double span() const noexcept { return max_range - min_range; }
  double denormalize(double v) const noexcept { return min_range + v * span(); }
};

/// Throws Error(kEmptyImage) when no pixel is valid.
GrayImage normalize_to_gray(const SphericalRangeImage& img);
/// Inverse of normalize_to_gray on valid pixels; invalid pixels get range 0.
Grid<double> denormalize(const GrayImage& gray, const Mask& valid);

/// 8-bit binary PGM (P5) of a [0, 1] image.
void write_pgm(const std::filesystem::path& path, const Grid<double>& gray);

}  // namespace lilo
