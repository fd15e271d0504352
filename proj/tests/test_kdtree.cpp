#include <doctest.h>

#include <algorithm>
#include <random>

#include "lilo/kdtree.hpp"

using namespace lilo;

namespace {

std::vector<Neighbor> brute_force(const std::vector<Vec3>& pts, const Vec3& q, double radius,
                                  std::size_t k) {
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d2 = (pts[i] - q).squaredNorm();
    if (d2 <= radius * radius) out.push_back({static_cast<std::uint32_t>(i), d2});
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.squared_distance < b.squared_distance ||
           (a.squared_distance == b.squared_distance && a.index < b.index);
  });
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<Vec3> random_points(std::size_t n, double side, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-side / 2.0, side / 2.0);
  std::vector<Vec3> pts(n);
  for (Vec3& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  return pts;
}

bool same(const std::vector<Neighbor>& a, const std::vector<Neighbor>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].index != b[i].index || a[i].squared_distance != b[i].squared_distance) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("kdtree") {
  TEST_CASE("empty tree") {
    const KdTree tree;
    CHECK(tree.empty());
    CHECK(tree.radius_search(Vec3::Zero(), 10.0).empty());
    CHECK(tree.knn(Vec3::Zero(), 5).empty());
  }

  TEST_CASE("radius and knn queries equal brute force") {
    std::mt19937_64 rng(17);
    for (const std::size_t n : {1u, 7u, 100u, 3000u}) {
      const std::vector<Vec3> pts = random_points(n, 10.0, rng);
      const KdTree tree(pts);
      REQUIRE(tree.size() == n);
      const std::vector<Vec3> queries = random_points(300, 12.0, rng);
      for (const Vec3& q : queries) {
        CHECK(same(tree.radius_search(q, 1.5), brute_force(pts, q, 1.5, pts.size())));
        CHECK(same(tree.knn(q, 8), brute_force(pts, q, 1e300, 8)));
        CHECK(same(tree.knn(q, 8, 1.0), brute_force(pts, q, 1.0, 8)));
      }
    }
  }

  TEST_CASE("ties are broken by index") {
    std::vector<Vec3> pts(20, Vec3(1, 1, 1));
    pts.emplace_back(0, 0, 0);
    const KdTree tree(pts);
    const std::vector<Neighbor> r = tree.knn(Vec3(1, 1, 1), 5);
    REQUIRE(r.size() == 5);
    for (std::uint32_t i = 0; i < 5; ++i) {
      CHECK(r[i].index == i);
      CHECK(r[i].squared_distance == 0.0);
    }
    CHECK(tree.radius_search(Vec3(1, 1, 1), 0.5).size() == 20);
  }

  TEST_CASE("radius bound is inclusive") {
    const KdTree tree(std::vector<Vec3>{Vec3(1, 0, 0), Vec3(2, 0, 0)});
    const std::vector<Neighbor> r = tree.radius_search(Vec3::Zero(), 1.0);
    REQUIRE(r.size() == 1);
    CHECK(r[0].index == 0);
  }
}
