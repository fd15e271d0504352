#pragma once

#include <array>

#include "lilo/sri.hpp"

namespace lilo {

using Kernel3x3 = std::array<std::array<double, 3>, 3>;

/// Horizontal-gradient mask; responds to vertical structures (edges).
inline constexpr Kernel3x3 kEdgeMask{{{-1.0, 0.0, 1.0}, {-2.0, 0.0, 2.0}, {-1.0, 0.0, 1.0}}};
/// Vertical-gradient mask; responds to horizontal structures (ground rings).
inline constexpr Kernel3x3 kGroundMask{{{-1.0, -2.0, -1.0}, {0.0, 0.0, 0.0}, {1.0, 2.0, 1.0}}};

struct SobelConfig {
  double edge_threshold = 0.30;
  double ground_threshold = 0.08;
  double ground_z_max = -0.5;    // meters, sensor frame
  double fft_ground_eps = 0.02;  // fraction of the image range span

  void validate() const;
};

struct ConvolutionResult {
  Grid<double> response;
  Mask valid;
};

/// 3×3 correlation, out(i,j) = Σ k[a][b]·img(i+a−1, j+b−1) accumulated
/// row-major over (a, b). Defined only where all nine taps are valid; the
/// image border is invalid. Throws Error(kImageTooSmall) below 3×3.
ConvolutionResult convolve3x3(const Grid<double>& img, const Mask& valid, const Kernel3x3& kernel,
                              Exec exec = Exec::kParallel);

enum class FeatureLabel : std::uint8_t { kNone = 0, kEdge = 1, kGround = 2, kSurface = 3 };

/// One feature class: original ranges where claimed, 0 elsewhere.
struct FeatureImage {
  Grid<double> range;
  Mask valid;

  std::size_t count() const;
};

/// Every valid source pixel is claimed by exactly one of edge/ground/surface.
struct FeatureImages {
  FeatureImage edge;
  FeatureImage ground;
  FeatureImage surface;
  Grid<double> z_map;
  Grid<FeatureLabel> labels;
};

/// Sobel segmentation with precedence edge > ground > surface.
///
/// Edge: some pixel in the horizontal 3-neighborhood has |M_E ∗ I| ≥
/// edge_threshold and this pixel is the near side of the jump, i.e. one of its
/// horizontal neighbors is farther by at least edge_threshold / 4 (the step a
/// full-height Sobel column needs to reach the threshold). Only the
/// foreground side of an occlusion boundary is kept, so a step yields one
/// edge column and a one-pixel pole is itself the edge.
///
/// Ground: |M_G ∗ I| ≥ ground_threshold and z < ground_z_max.
///
/// Throws Error(kEmptyImage) for an all-invalid image.
FeatureImages segment_sobel(const SphericalRangeImage& img, const SobelConfig& cfg,
                            Exec exec = Exec::kParallel);

/// Removes the horizontal DC component of each row through a 2D FFT: the
/// spectrum is masked at horizontal frequency 0 (the column N/2 once the
/// spectrum is shifted to the center) across all vertical frequencies and
/// transformed back. Invalid pixels are filled with their row's valid mean
/// before the transform. Throws Error(kOddWidth) when the width is odd.
Grid<double> remove_horizontal_dc(const Grid<double>& img, const Mask& valid);

struct FftGroundResult {
  /// Ground-removed image I' in meters: range minus its row's horizontal DC.
  /// Signed; zero at invalid pixels.
  Grid<double> deviation;
  /// Source pixels whose |deviation| ≥ fft_ground_eps · span.
  SphericalRangeImage filtered;
  /// Source pixels whose |deviation| < fft_ground_eps · span.
  SphericalRangeImage ground;
  double span = 0.0;
};

FftGroundResult fft_ground_filter(const SphericalRangeImage& img, double fft_ground_eps);

/// Ground from the frequency path (gated by z < ground_z_max), edges from
/// the Sobel edge rule applied to the ground-removed image, surface the rest.
FeatureImages segment_frequency(const SphericalRangeImage& img, const SobelConfig& cfg,
                                Exec exec = Exec::kParallel);

/// Range image restricted to one feature class, for dumps and reconstruction.
SphericalRangeImage feature_as_image(const FeatureImage& feature, const Grid<double>& z_map);

}  // namespace lilo
