#include <doctest.h>

#include <numbers>
#include <random>

#include "lilo/geom.hpp"

using namespace lilo;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 random_vec(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  return {n(rng), n(rng), n(rng)};
}

PoseSE3 random_pose(std::mt19937_64& rng) {
  return se3_exp(Twist{random_vec(rng, 0.8), random_vec(rng, 5.0)});
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("geom") {
  TEST_CASE("compose with identity and inverse") {
    CHECK(max_abs((PoseSE3::identity() * PoseSE3::identity()).matrix() -
                  Eigen::Matrix4d::Identity()) == 0.0);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
      const PoseSE3 t = random_pose(rng);
      CHECK(max_abs((t * t.inverse()).matrix() - Eigen::Matrix4d::Identity()) < 1e-9);
    }
  }

  TEST_CASE("compose matches homogeneous matrix product") {
    const PoseSE3 a = make_pose(rot_z(kPi / 6.0), Vec3(1, 0, 0));
    const PoseSE3 b = make_pose(rot_z(kPi / 3.0), Vec3::Zero());
    const Eigen::Matrix4d oracle = a.matrix() * b.matrix();
    CHECK(max_abs((a * b).matrix() - oracle) < 1e-12);
    CHECK(max_abs((a * b).rotation - rot_z(kPi / 2.0)) < 1e-12);
    CHECK(((a * b).translation - Vec3(1, 0, 0)).norm() < 1e-12);
  }

  TEST_CASE("apply") {
    CHECK(se3_apply(PoseSE3::identity(), Vec3(1, 2, 3)) == Vec3(1, 2, 3));
    CHECK(se3_apply(make_pose(Mat3::Identity(), Vec3(0, 0, 5)), Vec3(1, 2, 3)) == Vec3(1, 2, 8));
    CHECK((se3_apply(make_pose(rot_z(kPi / 2.0), Vec3::Zero()), Vec3(1, 0, 0)) - Vec3(0, 1, 0))
              .norm() < 1e-12);
  }

  TEST_CASE("apply distributes over compose") {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 200; ++k) {
      const PoseSE3 a = random_pose(rng), b = random_pose(rng);
      const Vec3 p = random_vec(rng, 10.0);
      CHECK((se3_apply(a * b, p) - se3_apply(a, se3_apply(b, p))).norm() < 1e-9);
    }
  }

  TEST_CASE("exp and log") {
    CHECK(max_abs(se3_exp(Twist{}).matrix() - Eigen::Matrix4d::Identity()) == 0.0);
    const PoseSE3 quarter = se3_exp(Twist{Vec3(0, 0, kPi / 2.0), Vec3::Zero()});
    CHECK((quarter.rotation * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm() < 1e-12);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> angle(0.0, 3.0);
    for (int k = 0; k < 100; ++k) {
      const Twist xi{random_vec(rng, 1.0).normalized() * angle(rng), random_vec(rng, 4.0)};
      const Twist back = se3_log(se3_exp(xi));
      CHECK((back.vector() - xi.vector()).norm() < 1e-9);
    }
  }

  TEST_CASE("small-angle series") {
    const Twist xi{Vec3(1e-10, -2e-10, 3e-11), Vec3(0.5, -1.0, 2.0)};
    CHECK((se3_log(se3_exp(xi)).vector() - xi.vector()).norm() < 1e-15);
  }

  TEST_CASE("log near pi is rejected") {
    const PoseSE3 half_turn = make_pose(rot_x(kPi - 1e-8), Vec3::Zero());
    try {
      se3_log(half_turn);
      FAIL("expected an error");
    } catch (const lilo::Error& e) {
      CHECK(e.code() == ErrorCode::kRotationNearPi);
    }
  }

  TEST_CASE("orthonormality under many compositions") {
    std::mt19937_64 rng(4);
    PoseSE3 acc;
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      acc = acc * random_pose(rng);
      worst = std::max(worst, orthonormality_error(acc.rotation));
    }
    CHECK(worst < 1e-6);
  }

  TEST_CASE("orthonormalize repairs drift") {
    Mat3 r = rot_y(0.3) * rot_z(1.1);
    r(0, 1) += 1e-4;
    const Mat3 fixed = orthonormalize(r);
    CHECK(orthonormality_error(fixed) < 1e-14);
    CHECK(fixed.determinant() == doctest::Approx(1.0));
  }

  TEST_CASE("rotation angle") {
    CHECK(make_pose(rot_z(0.7), Vec3::Zero()).rotation_angle() == doctest::Approx(0.7));
    CHECK(PoseSE3::identity().rotation_angle() == 0.0);
  }
}
