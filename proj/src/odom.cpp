#include "lilo/odom.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace lilo {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

constexpr double kNormRegularizer = 1e-9;
constexpr int kMaxStepHalvings = 4;

struct Moments {
  Vec3 centroid;
  Eigen::SelfAdjointEigenSolver<Mat3> eigen;  // ascending eigenvalues
};

Moments moments(std::span<const Vec3> pts) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : pts) {
    const Vec3 d = p - c;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(pts.size());
  return {c, Eigen::SelfAdjointEigenSolver<Mat3>(cov)};
}

Eigen::Matrix<double, 3, 6> point_jacobian(const PoseSE3& pose, const Vec3& p) {
  Eigen::Matrix<double, 3, 6> j;
  j.leftCols<3>() = -pose.rotation * skew(p);
  j.rightCols<3>() = pose.rotation;
  return j;
}

double huber_weight(double r, double delta) {
  if (delta <= 0.0) return 1.0;
  const double a = std::abs(r);
  return a <= delta ? 1.0 : delta / a;
}

double huber_cost(double r, double delta) {
  const double a = std::abs(r);
  if (delta <= 0.0 || a <= delta) return 0.5 * r * r;
  return delta * (a - 0.5 * delta);
}

// A correspondence fixed for the duration of one Gauss–Newton iteration.
struct Correspondence {
  bool valid = false;
  bool is_edge = false;
  Vec3 point;   // sensor frame
  Vec3 anchor;  // line point or plane point
  Vec3 axis;    // line direction or plane normal
};

Residual evaluate(const PoseSE3& pose, const Correspondence& c) {
  return c.is_edge ? edge_residual(pose, c.point, Line{c.anchor, c.axis})
                   : surface_residual(pose, c.point, Plane{c.anchor, c.axis});
}

double total_cost(const PoseSE3& pose, const std::vector<Correspondence>& corr, double delta) {
  double cost = 0.0;
  for (const Correspondence& c : corr) {
    if (c.valid) cost += huber_cost(evaluate(pose, c).value, delta);
  }
  return cost;
}

}  // namespace

std::string_view to_string(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::kEG: return "EG";
    case FeatureGroup::kES: return "ES";
    case FeatureGroup::kEGS: return "EGS";
  }
  return "EGS";
}

std::optional<FeatureGroup> parse_feature_group(std::string_view text) {
  if (text == "EG") return FeatureGroup::kEG;
  if (text == "ES") return FeatureGroup::kES;
  if (text == "EGS") return FeatureGroup::kEGS;
  return std::nullopt;
}

void OdomConfig::validate() const {
  const bool ok = neighbor_radius > 0.0 && min_neighbors >= 2 && max_neighbors >= min_neighbors &&
                  max_gn_iterations > 0 && convergence_eps > 0.0 && map_trim_radius > 0.0 &&
                  line_ratio > 0.0 && plane_flatness > 0.0 && plane_min_spread >= 0.0 &&
                  plane_max_mean_distance > 0.0 && min_correspondences > 0 &&
                  map_leaf_edge > 0.0 && map_leaf_surface > 0.0 && default_dt > 0.0;
  if (!ok) {
    throw Error(ErrorCode::kConfigError, "odometry parameters must be positive "
                                         "(max_neighbors >= min_neighbors >= 2)");
  }
}

std::optional<Line> fit_line(std::span<const Vec3> neighbors, const OdomConfig& cfg) {
  if (neighbors.size() < static_cast<std::size_t>(std::max(cfg.min_neighbors, 2))) {
    return std::nullopt;
  }
  const Moments m = moments(neighbors);
  const Vec3 lambda = m.eigen.eigenvalues();
  if (!(lambda(2) > 0.0) || lambda(2) < cfg.line_ratio * lambda(1)) return std::nullopt;
  return Line{m.centroid, m.eigen.eigenvectors().col(2).normalized()};
}

std::optional<Plane> fit_plane(std::span<const Vec3> neighbors, const OdomConfig& cfg) {
  if (neighbors.size() < static_cast<std::size_t>(std::max(cfg.min_neighbors, 3))) {
    return std::nullopt;
  }
  const Moments m = moments(neighbors);
  const Vec3 lambda = m.eigen.eigenvalues();
  if (!(lambda(1) > 0.0) || lambda(1) < cfg.plane_min_spread * lambda(2) ||
      lambda(0) > cfg.plane_flatness * lambda(1)) {
    return std::nullopt;
  }
  const Vec3 normal = m.eigen.eigenvectors().col(0).normalized();
  double mean_distance = 0.0;
  for (const Vec3& p : neighbors) mean_distance += std::abs((p - m.centroid).dot(normal));
  mean_distance /= static_cast<double>(neighbors.size());
  if (mean_distance > cfg.plane_max_mean_distance) return std::nullopt;
  return Plane{m.centroid, normal};
}

Residual edge_residual(const PoseSE3& pose, const Vec3& p, const Line& line) {
  const Vec3 d = pose.apply(p) - line.point;
  const Vec3 v = d.cross(line.direction);
  const double norm = v.norm();
  Residual out;
  out.value = norm;
  if (norm > kNormRegularizer) {
    const Vec3 u = v / norm;
    out.jacobian = u.transpose() * (-skew(line.direction)) * point_jacobian(pose, p);
  }
  return out;
}

Residual surface_residual(const PoseSE3& pose, const Vec3& p, const Plane& plane) {
  Residual out;
  out.value = (pose.apply(p) - plane.point).dot(plane.normal);
  out.jacobian = plane.normal.transpose() * point_jacobian(pose, p);
  return out;
}

// ---------------------------------------------------------------------------
// LocalFeatureMap

std::size_t LocalFeatureMap::KeyHash::operator()(const Key& k) const noexcept {
  const auto ux = static_cast<std::uint64_t>(k.x);
  const auto uy = static_cast<std::uint64_t>(k.y);
  const auto uz = static_cast<std::uint64_t>(k.z);
  return static_cast<std::size_t>((ux * 73856093ULL) ^ (uy * 19349663ULL) ^ (uz * 83492791ULL));
}

void LocalFeatureMap::Layer::insert(const Vec3& p) {
  const Key key{static_cast<std::int64_t>(std::floor(p.x() / leaf)),
                static_cast<std::int64_t>(std::floor(p.y() / leaf)),
                static_cast<std::int64_t>(std::floor(p.z() / leaf))};
  Cell& cell = cells[key];
  cell.sum += p;
  cell.count += 1.0;
}

void LocalFeatureMap::Layer::trim(const Vec3& center, double radius) {
  std::erase_if(cells, [&](const auto& kv) {
    const Vec3 c = kv.second.sum / kv.second.count;
    return ((c - center).cwiseAbs().array() > radius).any();
  });
}

std::vector<Vec3> LocalFeatureMap::Layer::centroids() const {
  std::vector<std::pair<Key, Vec3>> sorted;
  sorted.reserve(cells.size());
  for (const auto& [key, cell] : cells) sorted.emplace_back(key, cell.sum / cell.count);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Vec3> out;
  out.reserve(sorted.size());
  for (const auto& kv : sorted) out.push_back(kv.second);
  return out;
}

LocalFeatureMap::LocalFeatureMap(double leaf_edge, double leaf_surface, double trim_radius)
    : trim_radius_(trim_radius) {
  edge_.leaf = leaf_edge;
  surface_.leaf = leaf_surface;
}

void LocalFeatureMap::insert(const PointCloud& edge_world, const PointCloud& surface_world) {
  for (const Vec3& p : edge_world.points) edge_.insert(p);
  for (const Vec3& p : surface_world.points) surface_.insert(p);
}

void LocalFeatureMap::trim(const Vec3& center) {
  edge_.trim(center, trim_radius_);
  surface_.trim(center, trim_radius_);
}

void LocalFeatureMap::rebuild() {
  edge_tree_ = KdTree(edge_.centroids());
  surface_tree_ = KdTree(surface_.centroids());
}

// ---------------------------------------------------------------------------
// Pose estimation

PointCloud plane_group(const FeatureClouds& features, FeatureGroup group) {
  switch (group) {
    case FeatureGroup::kEG: return features.ground;
    case FeatureGroup::kES: return features.surface;
    case FeatureGroup::kEGS: {
      PointCloud out = features.surface;
      append_cloud(out, features.ground);
      return out;
    }
  }
  return features.surface;
}

PoseEstimate estimate_pose(const PointCloud& edge, const PointCloud& planar,
                           const LocalFeatureMap& map, const PoseSE3& initial,
                           const OdomConfig& cfg, Exec exec) {
  PoseEstimate result;
  result.pose = initial;

  const std::size_t n_edge = edge.size();
  const std::size_t n_total = n_edge + planar.size();
  std::vector<Correspondence> corr(n_total);
  std::vector<Residual> residuals(n_total);
  const auto n = static_cast<std::int64_t>(n_total);
  const double delta = cfg.huber_delta;
  const auto k = static_cast<std::size_t>(cfg.max_neighbors);

  PoseSE3 pose = initial;
  for (int iter = 0; iter < cfg.max_gn_iterations; ++iter) {
    auto t0 = Clock::now();
#pragma omp parallel for schedule(dynamic, 64) if (exec == Exec::kParallel)
    for (std::int64_t s = 0; s < n; ++s) {
      const auto idx = static_cast<std::size_t>(s);
      const bool is_edge = idx < n_edge;
      const Vec3& p = is_edge ? edge.points[idx] : planar.points[idx - n_edge];
      Correspondence& c = corr[idx];
      c.valid = false;
      c.is_edge = is_edge;
      c.point = p;
      const KdTree& tree = is_edge ? map.edge_index() : map.surface_index();
      if (tree.empty()) continue;
      const auto nbrs = tree.knn(pose.apply(p), k, cfg.neighbor_radius);
      if (nbrs.size() < static_cast<std::size_t>(cfg.min_neighbors)) continue;
      std::vector<Vec3> pts;
      pts.reserve(nbrs.size());
      for (const Neighbor& nb : nbrs) pts.push_back(tree.points()[nb.index]);
      // The fit gives the direction; the line or plane is anchored at the
      // nearest map point, so a frame already in the map has zero residual.
      if (is_edge) {
        if (const auto line = fit_line(pts, cfg)) {
          c.valid = true;
          c.anchor = pts.front();
          c.axis = line->direction;
        }
      } else if (const auto plane = fit_plane(pts, cfg)) {
        c.valid = true;
        c.anchor = pts.front();
        c.axis = plane->normal;
      }
      if (c.valid) residuals[idx] = evaluate(pose, c);
    }
    result.association_ms += elapsed_ms(t0);
    t0 = Clock::now();

    // Sequential reduction in point order keeps the result independent of
    // the thread count.
    Mat6 h = Mat6::Zero();
    Vec6 g = Vec6::Zero();
    double cost = 0.0;
    std::size_t count = 0;
    for (std::size_t idx = 0; idx < n_total; ++idx) {
      if (!corr[idx].valid) continue;
      const Residual& r = residuals[idx];
      const double w = huber_weight(r.value, delta);
      h.noalias() += w * r.jacobian.transpose() * r.jacobian;
      g.noalias() += w * r.jacobian.transpose() * r.value;
      cost += huber_cost(r.value, delta);
      ++count;
    }
    result.correspondences = count;
    if (count < static_cast<std::size_t>(cfg.min_correspondences)) {
      result.status = EstimateStatus::kInsufficientConstraints;
      result.pose = initial;
      result.optimization_ms += elapsed_ms(t0);
      return result;
    }

    const Vec6 step = h.ldlt().solve(-g);
    IterationTrace trace{cost, cost, count, 0.0};
    bool accepted = false;
    if (step.allFinite()) {
      Vec6 trial = step;
      for (int halving = 0; halving <= kMaxStepHalvings; ++halving, trial *= 0.5) {
        const PoseSE3 candidate = pose * se3_exp(Twist::from_vector(trial));
        const double trial_cost = total_cost(candidate, corr, delta);
        if (trial_cost <= cost) {
          pose = candidate;
          trace.cost_after = trial_cost;
          trace.step_norm = trial.norm();
          accepted = true;
          break;
        }
      }
    }
    result.optimization_ms += elapsed_ms(t0);
    result.iterations = iter + 1;
    result.trace.push_back(trace);
    if (!accepted || trace.step_norm < cfg.convergence_eps) {
      result.status = EstimateStatus::kConverged;
      result.pose = pose;
      return result;
    }
  }
  result.status = EstimateStatus::kMaxIterations;
  result.pose = pose;
  return result;
}

// ---------------------------------------------------------------------------
// Motion model and map maintenance

std::vector<double> scan_fractions(const PointCloud& cloud) {
  std::vector<double> out(cloud.size());
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    const Vec3& p = cloud.points[k];
    double s = (std::numbers::pi - std::atan2(p.y(), p.x())) / (2.0 * std::numbers::pi);
    if (s >= 1.0) s -= 1.0;
    out[k] = std::clamp(s, 0.0, 1.0);
  }
  return out;
}

PointCloud undistort(const PointCloud& cloud, std::span<const double> fractions,
                     const Twist& motion) {
  PointCloud out = cloud;
  if (motion.norm() == 0.0) return out;
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    out.points[k] = se3_exp(motion.scaled(fractions[k] - 1.0)).apply(cloud.points[k]);
  }
  return out;
}

PoseSE3 predict(const OdomState& state, double dt) {
  if (!state.initialized) return PoseSE3::identity();
  return state.pose * se3_exp(state.velocity.scaled(dt));
}

void update_map(LocalFeatureMap& map, const FeatureClouds& features, const PoseSE3& pose,
                const OdomConfig& cfg) {
  map.insert(transform_cloud(features.edge, pose),
             transform_cloud(plane_group(features, cfg.feature_group), pose));
  map.trim(pose.translation);
  map.rebuild();
}

Odometry::Odometry(OdomConfig cfg, Exec exec)
    : cfg_(cfg), exec_(exec), map_(cfg.map_leaf_edge, cfg.map_leaf_surface, cfg.map_trim_radius) {
  cfg_.validate();
}

FeatureClouds Odometry::deskew(const FeatureClouds& f, const Twist& motion) const {
  if (!cfg_.undistort || motion.norm() == 0.0) return f;
  const auto apply = [&motion](const PointCloud& c) {
    return undistort(c, scan_fractions(c), motion);
  };
  return {apply(f.edge), apply(f.surface), apply(f.ground)};
}

FrameResult Odometry::process(const FeatureClouds& features, double dt) {
  if (!(dt > 0.0)) dt = cfg_.default_dt;
  FrameResult out;

  if (!state_.initialized) {
    auto t0 = Clock::now();
    update_map(map_, features, PoseSE3::identity(), cfg_);
    out.map_update_ms = elapsed_ms(t0);
    state_.initialized = true;
    state_.frame_index = 1;
    out.bootstrap = true;
    out.pose = state_.pose;
    return out;
  }

  const PoseSE3 prediction = predict(state_, dt);
  const FeatureClouds pre = deskew(features, state_.velocity.scaled(dt));
  // Surface and ground share one map layer; merging them per map voxel here
  // keeps frame points and map cells in one-to-one correspondence.
  const PointCloud planar =
      voxel_downsample(plane_group(pre, cfg_.feature_group), cfg_.map_leaf_surface, exec_);
  out.estimate = estimate_pose(pre.edge, planar, map_, prediction, cfg_, exec_);
  const PoseSE3 pose = out.estimate.pose;

  auto t0 = Clock::now();
  const Twist motion = se3_log(state_.pose.inverse() * pose);
  update_map(map_, deskew(features, motion), pose, cfg_);
  out.map_update_ms = elapsed_ms(t0);

  state_.previous_pose = state_.pose;
  state_.pose = pose;
  state_.velocity = motion.scaled(1.0 / dt);
  ++state_.frame_index;
  out.pose = pose;
  return out;
}

PoseSE3 Odometry::coast(double dt) {
  if (!(dt > 0.0)) dt = cfg_.default_dt;
  if (!state_.initialized) {
    state_.initialized = true;
    state_.frame_index = 1;
    return state_.pose;
  }
  state_.previous_pose = state_.pose;
  state_.pose = predict(state_, dt);
  ++state_.frame_index;
  return state_.pose;
}

}  // namespace lilo
