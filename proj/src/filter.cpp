#include "lilo/filter.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>

namespace lilo {

namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
std::unique_ptr<T[], FftwFree> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return std::unique_ptr<T[], FftwFree>(p);
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// Near side of a horizontal jump next to a strong horizontal gradient.
void label_edges(const Grid<double>& values, const Mask& valid, const ConvolutionResult& edge,
                 double threshold, Grid<FeatureLabel>& labels, Exec exec) {
  const int rows = values.rows();
  const int cols = values.cols();
  const double min_step = threshold / 4.0;
#pragma omp parallel for schedule(static) if (exec == Exec::kParallel)
  for (int i = 0; i < rows; ++i) {
    for (int j = 1; j + 1 < cols; ++j) {
      if (!valid(i, j)) continue;
      bool strong = false;
      for (int b = j - 1; b <= j + 1; ++b) {
        if (edge.valid(i, b) && std::abs(edge.response(i, b)) >= threshold) strong = true;
      }
      if (!strong) continue;
      const double v = values(i, j);
      double farther = 0.0;
      if (valid(i, j - 1)) farther = std::max(farther, values(i, j - 1) - v);
      if (valid(i, j + 1)) farther = std::max(farther, values(i, j + 1) - v);
      if (farther >= min_step) labels(i, j) = FeatureLabel::kEdge;
    }
  }
}

FeatureImages assemble(const SphericalRangeImage& img, Grid<FeatureLabel> labels) {
  const int rows = img.rows();
  const int cols = img.cols();
  FeatureImages out{{Grid<double>(rows, cols, 0.0), Mask(rows, cols, 0)},
                    {Grid<double>(rows, cols, 0.0), Mask(rows, cols, 0)},
                    {Grid<double>(rows, cols, 0.0), Mask(rows, cols, 0)},
                    img.z_map,
                    std::move(labels)};
  for (std::size_t c = 0; c < img.range.size(); ++c) {
    if (!img.valid.data()[c]) continue;
    FeatureImage* target = nullptr;
    switch (out.labels.data()[c]) {
      case FeatureLabel::kEdge: target = &out.edge; break;
      case FeatureLabel::kGround: target = &out.ground; break;
      default:
        out.labels.data()[c] = FeatureLabel::kSurface;
        target = &out.surface;
        break;
    }
    target->range.data()[c] = img.range.data()[c];
    target->valid.data()[c] = 1;
  }
  return out;
}

}  // namespace

void SobelConfig::validate() const {
  if (!(edge_threshold > 0.0 && edge_threshold < 1.0) ||
      !(ground_threshold > 0.0 && ground_threshold < 1.0)) {
    throw Error(ErrorCode::kConfigError, "filter thresholds must lie in (0, 1)");
  }
  if (!(fft_ground_eps > 0.0)) {
    throw Error(ErrorCode::kConfigError, "filter.fft_ground_eps must be positive");
  }
}

std::size_t FeatureImage::count() const {
  return static_cast<std::size_t>(std::count(valid.data().begin(), valid.data().end(), 1));
}

ConvolutionResult convolve3x3(const Grid<double>& img, const Mask& valid, const Kernel3x3& kernel,
                              Exec exec) {
  const int rows = img.rows();
  const int cols = img.cols();
  if (rows < 3 || cols < 3) {
    throw Error(ErrorCode::kImageTooSmall,
                std::to_string(rows) + "x" + std::to_string(cols) + " image");
  }
  ConvolutionResult out{Grid<double>(rows, cols, 0.0), Mask(rows, cols, 0)};
#pragma omp parallel for schedule(static) if (exec == Exec::kParallel)
  for (int i = 1; i < rows - 1; ++i) {
    for (int j = 1; j < cols - 1; ++j) {
      double acc = 0.0;
      bool ok = true;
      for (int a = 0; a < 3 && ok; ++a) {
        const double* src = img.row(i + a - 1);
        const std::uint8_t* m = valid.row(i + a - 1);
        for (int b = 0; b < 3; ++b) {
          if (!m[j + b - 1]) {
            ok = false;
            break;
          }
          acc += kernel[a][b] * src[j + b - 1];
        }
      }
      if (ok) {
        out.response(i, j) = acc;
        out.valid(i, j) = 1;
      }
    }
  }
  return out;
}

FeatureImages segment_sobel(const SphericalRangeImage& img, const SobelConfig& cfg, Exec exec) {
  const GrayImage gray = normalize_to_gray(img);
  const ConvolutionResult edge = convolve3x3(gray.value, img.valid, kEdgeMask, exec);
  const ConvolutionResult ground = convolve3x3(gray.value, img.valid, kGroundMask, exec);

  Grid<FeatureLabel> labels(img.rows(), img.cols(), FeatureLabel::kNone);
  label_edges(gray.value, img.valid, edge, cfg.edge_threshold, labels, exec);
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (!img.valid.data()[c] || labels.data()[c] == FeatureLabel::kEdge) continue;
    if (ground.valid.data()[c] && std::abs(ground.response.data()[c]) >= cfg.ground_threshold &&
        img.z_map.data()[c] < cfg.ground_z_max) {
      labels.data()[c] = FeatureLabel::kGround;
    }
  }
  return assemble(img, std::move(labels));
}

Grid<double> remove_horizontal_dc(const Grid<double>& img, const Mask& valid) {
  const int rows = img.rows();
  const int cols = img.cols();
  if (cols % 2 != 0) {
    throw Error(ErrorCode::kOddWidth, "width " + std::to_string(cols));
  }
  if (rows == 0 || cols == 0) return img;

  const int half = cols / 2 + 1;
  auto spatial = fftw_buffer<double>(static_cast<std::size_t>(rows) * cols);
  auto spectrum = fftw_buffer<fftw_complex>(static_cast<std::size_t>(rows) * half);

  for (int i = 0; i < rows; ++i) {
    double sum = 0.0;
    int n = 0;
    for (int j = 0; j < cols; ++j) {
      if (valid(i, j)) {
        sum += img(i, j);
        ++n;
      }
    }
    const double fill = n > 0 ? sum / n : 0.0;
    for (int j = 0; j < cols; ++j) {
      spatial[static_cast<std::size_t>(i) * cols + j] = valid(i, j) ? img(i, j) : fill;
    }
  }

  // Planning with FFTW_ESTIMATE leaves the buffers untouched.
  Plan forward(fftw_plan_dft_r2c_2d(rows, cols, spatial.get(), spectrum.get(), FFTW_ESTIMATE));
  Plan inverse(fftw_plan_dft_c2r_2d(rows, cols, spectrum.get(), spatial.get(), FFTW_ESTIMATE));
  fftw_execute(forward.get());
  for (int i = 0; i < rows; ++i) {
    fftw_complex& dc = spectrum[static_cast<std::size_t>(i) * half];
    dc[0] = 0.0;
    dc[1] = 0.0;
  }
  fftw_execute(inverse.get());

  const double scale = 1.0 / (static_cast<double>(rows) * cols);
  Grid<double> out(rows, cols, 0.0);
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (valid.data()[c]) out.data()[c] = spatial[c] * scale;
  }
  return out;
}

FftGroundResult fft_ground_filter(const SphericalRangeImage& img, double fft_ground_eps) {
  const GrayImage gray = normalize_to_gray(img);
  const Grid<double> filtered_gray = remove_horizontal_dc(gray.value, img.valid);

  FftGroundResult out{Grid<double>(img.rows(), img.cols(), 0.0),
                      SphericalRangeImage(img.rows(), img.cols()),
                      SphericalRangeImage(img.rows(), img.cols()), gray.span()};
  const double tolerance = fft_ground_eps * out.span;
  for (std::size_t c = 0; c < img.range.size(); ++c) {
    if (!img.valid.data()[c]) continue;
    // The offset of the normalization cancels in a zero-mean signal.
    const double dev = filtered_gray.data()[c] * out.span;
    out.deviation.data()[c] = dev;
    SphericalRangeImage& target = std::abs(dev) < tolerance ? out.ground : out.filtered;
    target.range.data()[c] = img.range.data()[c];
    target.z_map.data()[c] = img.z_map.data()[c];
    target.valid.data()[c] = 1;
  }
  return out;
}

FeatureImages segment_frequency(const SphericalRangeImage& img, const SobelConfig& cfg,
                                Exec exec) {
  const FftGroundResult fft = fft_ground_filter(img, cfg.fft_ground_eps);

  Grid<double> values(img.rows(), img.cols(), 0.0);
  if (fft.span > 0.0) {
    for (std::size_t c = 0; c < values.size(); ++c) {
      values.data()[c] = fft.deviation.data()[c] / fft.span;
    }
  }
  const ConvolutionResult edge = convolve3x3(values, img.valid, kEdgeMask, exec);

  Grid<FeatureLabel> labels(img.rows(), img.cols(), FeatureLabel::kNone);
  label_edges(values, img.valid, edge, cfg.edge_threshold, labels, exec);
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (labels.data()[c] == FeatureLabel::kEdge) continue;
    if (fft.ground.valid.data()[c] && img.z_map.data()[c] < cfg.ground_z_max) {
      labels.data()[c] = FeatureLabel::kGround;
    }
  }
  return assemble(img, std::move(labels));
}

SphericalRangeImage feature_as_image(const FeatureImage& feature, const Grid<double>& z_map) {
  SphericalRangeImage out;
  out.range = feature.range;
  out.valid = feature.valid;
  out.z_map = Grid<double>(z_map.rows(), z_map.cols(), 0.0);
  for (std::size_t c = 0; c < z_map.size(); ++c) {
    if (feature.valid.data()[c]) out.z_map.data()[c] = z_map.data()[c];
  }
  return out;
}

}  // namespace lilo
