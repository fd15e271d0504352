#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lilo/recon.hpp"
#include "lilo/sri.hpp"

using namespace lilo;

namespace {

constexpr double kPi = std::numbers::pi;

SriParams small_params() {
  SriParams p;
  p.width = 360;
  p.n_beams = 64;
  p.fov_min = -0.4363;
  p.fov_max = 0.4363;
  return p;
}

}  // namespace

TEST_SUITE("sri") {
  TEST_CASE("spherical coordinates") {
    const SphericalCoords a = spherical_coords(Vec3(1, 0, 0));
    CHECK(a.range == 1.0);
    CHECK(a.azimuth == 0.0);
    CHECK(a.elevation == 0.0);
    const SphericalCoords b = spherical_coords(Vec3(0, 2, 0));
    CHECK(b.range == 2.0);
    CHECK(b.azimuth == doctest::Approx(kPi / 2.0));
    const SphericalCoords c = spherical_coords(Vec3(1, 1, std::sqrt(2.0)));
    CHECK(c.range == doctest::Approx(2.0));
    CHECK(c.azimuth == doctest::Approx(kPi / 4.0));
    CHECK(c.elevation == doctest::Approx(kPi / 4.0));
    CHECK_THROWS_AS(spherical_coords(Vec3::Zero()), lilo::Error);
  }

  TEST_CASE("empty cloud gives an all-invalid image") {
    const ProjectionResult r = project(PointCloud{}, small_params());
    CHECK(r.image.rows() == 64);
    CHECK(r.image.cols() == 360);
    CHECK(r.image.valid_count() == 0);
  }

  TEST_CASE("single forward point") {
    PointCloud cloud;
    cloud.points.emplace_back(1, 0, 0);
    const SriParams p = small_params();
    const ProjectionResult r = project(cloud, p);
    REQUIRE(r.image.valid_count() == 1);
    // θ' = π lands in column π·N/2π; φ' = fov_max lands in row fov_max·y_res.
    const int col = static_cast<int>(std::floor(kPi * p.x_res()));
    const int row = static_cast<int>(std::floor(p.fov_max * p.y_res()));
    CHECK(col == 180);
    CHECK(r.image.valid(row, col) == 1);
    CHECK(r.image.range(row, col) == 1.0);
  }

  TEST_CASE("nearest return wins a shared cell") {
    PointCloud cloud;
    cloud.points.emplace_back(5, 0, -0.05);
    cloud.points.emplace_back(3, 0, -0.03);
    const ProjectionResult r = project(cloud, small_params());
    REQUIRE(r.image.valid_count() == 1);
    for (std::size_t c = 0; c < r.image.range.size(); ++c) {
      if (!r.image.valid.data()[c]) continue;
      CHECK(r.image.range.data()[c] == Vec3(3, 0, -0.03).norm());
      CHECK(r.image.z_map.data()[c] == -0.03);
    }
    CHECK(r.stats.collisions == 1);
  }

  TEST_CASE("nearest-wins matches brute force") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    PointCloud cloud;
    for (int k = 0; k < 20000; ++k) cloud.points.emplace_back(u(rng), u(rng), u(rng) * 0.2);
    const SriParams p = small_params();
    const ProjectionResult r = project(cloud, p);
    Grid<double> best(p.height(), p.width, 0.0);
    for (const Vec3& q : cloud.points) {
      const double range = q.norm();
      if (range < p.min_range) continue;
      const double phi = std::asin(q.z() / range);
      if (phi < p.fov_min || phi > p.fov_max) continue;
      const int j = std::clamp(
          static_cast<int>(std::floor((kPi - std::atan2(q.y(), q.x())) * p.x_res())), 0,
          p.width - 1);
      const int i = std::clamp(static_cast<int>(std::floor((p.fov_max - phi) * p.y_res())), 0,
                               p.height() - 1);
      if (best(i, j) == 0.0 || range < best(i, j)) best(i, j) = range;
    }
    CHECK(r.image.range == best);
  }

  TEST_CASE("image shape and minimum range invariant") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    PointCloud cloud;
    for (int k = 0; k < 5000; ++k) cloud.points.emplace_back(u(rng), u(rng), u(rng) * 0.1);
    for (const int width : {360, 720, 1024}) {
      SriParams p;
      p.width = width;
      p.interpolation_factor = 2;
      p.min_range = 1.0;
      const ProjectionResult r = project(cloud, p);
      CHECK(r.image.cols() == width);
      CHECK(r.image.rows() == p.n_beams);
      const SphericalRangeImage up = interpolate_rows(r.image, 2, p.interp_max_gap);
      CHECK(up.rows() == p.height());
      CHECK(up.cols() == width);
      for (std::size_t c = 0; c < r.image.range.size(); ++c) {
        if (r.image.valid.data()[c]) CHECK(r.image.range.data()[c] >= 1.0);
      }
    }
  }

  TEST_CASE("row interpolation") {
    SphericalRangeImage img(2, 4);
    for (int j = 0; j < 4; ++j) {
      img.range(0, j) = 4.0;
      img.range(1, j) = 6.0;
      img.z_map(0, j) = -1.0;
      img.z_map(1, j) = -2.0;
      img.valid(0, j) = img.valid(1, j) = 1;
    }
    CHECK(interpolate_rows(img, 1, 1.0).range == img.range);

    const SphericalRangeImage up = interpolate_rows(img, 2, 5.0);
    REQUIRE(up.rows() == 4);
    for (int j = 0; j < 4; ++j) {
      CHECK(up.range(0, j) == 4.0);
      CHECK(up.range(1, j) == 5.0);
      CHECK(up.z_map(1, j) == -1.5);
      CHECK(up.range(2, j) == 6.0);
      CHECK(up.valid(3, j) == 0);
    }

    img.range(0, 2) = 2.0;
    img.range(1, 2) = 50.0;
    const SphericalRangeImage gated = interpolate_rows(img, 2, 2.0);
    CHECK(gated.valid(1, 2) == 0);
  }

  TEST_CASE("gray normalization") {
    SphericalRangeImage img(1, 4);
    img.range(0, 0) = 2.0;
    img.range(0, 1) = 4.0;
    img.range(0, 2) = 6.0;
    img.valid(0, 0) = img.valid(0, 1) = img.valid(0, 2) = 1;
    const GrayImage g = normalize_to_gray(img);
    CHECK(g.value(0, 0) == 0.0);
    CHECK(g.value(0, 1) == 0.5);
    CHECK(g.value(0, 2) == 1.0);
    CHECK(g.value(0, 3) == 0.0);

    SphericalRangeImage flat(2, 2);
    for (std::size_t c = 0; c < 4; ++c) {
      flat.range.data()[c] = 7.0;
      flat.valid.data()[c] = 1;
    }
    const GrayImage flat_gray = normalize_to_gray(flat);
    for (const double v : flat_gray.value.data()) CHECK(v == 0.0);

    CHECK_THROWS_AS(normalize_to_gray(SphericalRangeImage(3, 3)), lilo::Error);
  }

  TEST_CASE("normalization round trip") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.5, 120.0);
    std::bernoulli_distribution keep(0.7);
    SphericalRangeImage img(16, 64);
    for (std::size_t c = 0; c < img.range.size(); ++c) {
      if (!keep(rng)) continue;
      img.range.data()[c] = u(rng);
      img.valid.data()[c] = 1;
    }
    const Grid<double> back = denormalize(normalize_to_gray(img), img.valid);
    for (std::size_t c = 0; c < back.size(); ++c) {
      if (!img.valid.data()[c]) continue;
      CHECK(std::abs(back.data()[c] - img.range.data()[c]) <= 1e-6 * img.range.data()[c]);
    }
  }

  TEST_CASE("project and reconstruct round trip") {
    SriParams p;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unit(0.1, 0.9), range(1.0, 90.0);
    PointCloud cloud;
    std::vector<double> ranges;
    for (int i = 0; i < p.n_beams; i += 3) {
      for (int j = 0; j < p.width; j += 7) {
        const double phi = p.fov_max - (i + unit(rng)) / p.y_res();
        const double theta = kPi - (j + unit(rng)) / p.x_res();
        const double r = range(rng);
        cloud.points.emplace_back(r * std::cos(phi) * std::cos(theta),
                                  r * std::cos(phi) * std::sin(theta), r * std::sin(phi));
        ranges.push_back(r);
      }
    }
    const ProjectionResult first = project(cloud, p);
    const PointCloud back =
        reconstruct(FeatureImage{first.image.range, first.image.valid}, first.image.z_map);
    REQUIRE(back.size() == ranges.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
      CHECK(back.points[k].norm() == doctest::Approx(ranges[k]).epsilon(1e-12));
    }
    // A second pass lands every point in its original cell or the next one.
    const ProjectionResult second = project(back, p);
    CHECK(second.image.valid_count() == first.image.valid_count());
    for (int i = 0; i < p.n_beams; ++i) {
      for (int j = 0; j < p.width; ++j) {
        if (!first.image.valid(i, j)) continue;
        const bool here = second.image.valid(i, j) != 0;
        const bool left = j > 0 && second.image.valid(i, j - 1) != 0;
        CHECK((here || left));
      }
    }
  }

  TEST_CASE("parallel projection equals serial") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    PointCloud cloud;
    for (int k = 0; k < 50000; ++k) cloud.points.emplace_back(u(rng), u(rng), u(rng) * 0.1);
    const ProjectionResult a = project(cloud, SriParams{}, Exec::kSerial);
    const ProjectionResult b = project(cloud, SriParams{}, Exec::kParallel);
    CHECK(a.image.range == b.image.range);
    CHECK(a.image.z_map == b.image.z_map);
    CHECK(a.image.valid == b.image.valid);
  }

  TEST_CASE("invalid parameters") {
    SriParams p;
    p.width = 0;
    CHECK_THROWS_AS(p.validate(), lilo::Error);
    p = SriParams{};
    p.fov_min = p.fov_max;
    CHECK_THROWS_AS(p.validate(), lilo::Error);
  }
}
