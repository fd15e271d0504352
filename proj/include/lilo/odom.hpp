#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>

#include "lilo/kdtree.hpp"
#include "lilo/recon.hpp"

namespace lilo {

/// Which clouds feed the point-to-plane term: ground only, surfaces only, or both.
enum class FeatureGroup { kEG, kES, kEGS };

std::string_view to_string(FeatureGroup group);
std::optional<FeatureGroup> parse_feature_group(std::string_view text);

struct OdomConfig {
  double neighbor_radius = 1.0;
  int min_neighbors = 5;
  int max_neighbors = 8;
  int max_gn_iterations = 10;
  double convergence_eps = 1e-4;
  double huber_delta = 0.1;  // ≤ 0 disables the robust loss
  double map_trim_radius = 100.0;
  double line_ratio = 3.0;               // λ_max ≥ line_ratio · λ_mid for a line
  double plane_flatness = 0.33;          // λ_min ≤ plane_flatness · λ_mid for a plane
  double plane_min_spread = 0.01;        // λ_mid ≥ plane_min_spread · λ_max, else a line
  double plane_max_mean_distance = 0.2;  // meters
  int min_correspondences = 10;
  double map_leaf_edge = 0.2;
  double map_leaf_surface = 0.4;
  double default_dt = 0.1;  // seconds, used when frames carry no timestamps
  bool undistort = true;
  FeatureGroup feature_group = FeatureGroup::kEGS;

  void validate() const;
};

struct Line {
  Vec3 point;
  Vec3 direction;  // unit
};

struct Plane {
  Vec3 point;
  Vec3 normal;  // unit
};

/// Centroid and principal axis of the covariance. Empty (degenerate) with
/// fewer than `min_neighbors` points or when λ_max < line_ratio · λ_mid.
std::optional<Line> fit_line(std::span<const Vec3> neighbors, const OdomConfig& cfg = {});

/// Centroid and least-variance axis. Empty (degenerate) with too few points,
/// when λ_min > plane_flatness · λ_mid, when the points are line-like
/// (λ_mid < plane_min_spread · λ_max) or when their mean distance to the
/// plane exceeds plane_max_mean_distance.
std::optional<Plane> fit_plane(std::span<const Vec3> neighbors, const OdomConfig& cfg = {});

using Jacobian6 = Eigen::Matrix<double, 1, 6>;

struct Residual {
  double value = 0.0;
  Jacobian6 jacobian = Jacobian6::Zero();  // w.r.t. δ in T·exp(δ), δ = (angular, linear)
};

/// Point-to-line distance |(T p − c) × n|.
Residual edge_residual(const PoseSE3& pose, const Vec3& p, const Line& line);

/// Signed point-to-plane distance (T p − c) · n.
Residual surface_residual(const PoseSE3& pose, const Vec3& p, const Plane& plane);

/// Voxel-accumulated feature points with a kd-tree over the voxel centroids.
class LocalFeatureMap {
 public:
  LocalFeatureMap() = default;
  LocalFeatureMap(double leaf_edge, double leaf_surface, double trim_radius);

  /// Adds world-frame points. Touched voxels keep the running centroid.
  void insert(const PointCloud& edge_world, const PointCloud& surface_world);
  /// Drops every voxel whose centroid leaves the axis-aligned box of
  /// half-width trim_radius around `center`.
  void trim(const Vec3& center);
  /// Rebuilds both kd-trees; required after insert/trim before querying.
  void rebuild();

  const KdTree& edge_index() const noexcept { return edge_tree_; }
  const KdTree& surface_index() const noexcept { return surface_tree_; }
  std::size_t edge_count() const noexcept { return edge_.cells.size(); }
  std::size_t surface_count() const noexcept { return surface_.cells.size(); }
  bool empty() const noexcept { return edge_.cells.empty() && surface_.cells.empty(); }
  double trim_radius() const noexcept { return trim_radius_; }

 private:
  struct Key {
    std::int64_t x, y, z;
    bool operator==(const Key&) const = default;
    auto operator<=>(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };
  struct Cell {
    Vec3 sum = Vec3::Zero();
    double count = 0.0;
  };
  struct Layer {
    double leaf = 0.2;
    std::unordered_map<Key, Cell, KeyHash> cells;

    void insert(const Vec3& p);
    void trim(const Vec3& center, double radius);
    std::vector<Vec3> centroids() const;  // ordered by key
  };

  Layer edge_;
  Layer surface_;
  double trim_radius_ = 100.0;
  KdTree edge_tree_;
  KdTree surface_tree_;
};

enum class EstimateStatus { kConverged, kMaxIterations, kInsufficientConstraints };

struct IterationTrace {
  double cost_before = 0.0;  // Huber cost at the iterate, this iteration's correspondences
  double cost_after = 0.0;   // same correspondences after the accepted step
  std::size_t correspondences = 0;
  double step_norm = 0.0;
};

struct PoseEstimate {
  PoseSE3 pose;
  EstimateStatus status = EstimateStatus::kConverged;
  int iterations = 0;
  std::size_t correspondences = 0;  // in the final iteration
  std::vector<IterationTrace> trace;
  double association_ms = 0.0;
  double optimization_ms = 0.0;
};

/// Points feeding the plane term for the configured feature group.
PointCloud plane_group(const FeatureClouds& features, FeatureGroup group);

/// Gauss–Newton over T in T·exp(δ), re-associating every iteration: edge
/// points against lines fitted to their map neighborhood, plane-group points
/// against fitted planes, Huber-weighted normal equations. A step that
/// raises the cost of its own correspondences is halved up to four times and
/// otherwise ends the solve. Fewer than min_correspondences associations
/// yield kInsufficientConstraints with `pose` = `initial`.
PoseEstimate estimate_pose(const PointCloud& edge, const PointCloud& planar,
                           const LocalFeatureMap& map, const PoseSE3& initial,
                           const OdomConfig& cfg, Exec exec = Exec::kParallel);

/// Acquisition fraction in [0, 1) from the azimuth: the scan starts at
/// azimuth π and sweeps clockwise, matching column order.
std::vector<double> scan_fractions(const PointCloud& cloud);

/// Moves every point to the scan-end frame: p ← exp(motion · (s − 1)) · p,
/// `motion` being the body twist accumulated over the whole scan.
PointCloud undistort(const PointCloud& cloud, std::span<const double> fractions,
                     const Twist& motion);

struct OdomState {
  PoseSE3 pose;
  PoseSE3 previous_pose;
  Twist velocity;  // per second, body frame
  std::size_t frame_index = 0;
  bool initialized = false;
};

/// T_k · exp(velocity · dt); identity before the first frame.
PoseSE3 predict(const OdomState& state, double dt);

/// Transforms `features` by `pose`, inserts them, trims around the pose and
/// rebuilds the indices.
void update_map(LocalFeatureMap& map, const FeatureClouds& features, const PoseSE3& pose,
                const OdomConfig& cfg);

struct FrameResult {
  PoseSE3 pose;
  PoseEstimate estimate;
  bool bootstrap = false;
  double map_update_ms = 0.0;
};

/// Single-writer odometry state machine, one frame at a time:
/// predict → undistort with the predicted motion → estimate → undistort with
/// the estimated motion → map update.
class Odometry {
 public:
  explicit Odometry(OdomConfig cfg, Exec exec = Exec::kParallel);

  /// `features` are scan-end sensor-frame clouds after voxel downsampling.
  FrameResult process(const FeatureClouds& features, double dt);
  /// Advances by the constant-velocity prediction without touching the map,
  /// for frames that could not be processed.
  PoseSE3 coast(double dt);

  const OdomState& state() const noexcept { return state_; }
  const LocalFeatureMap& map() const noexcept { return map_; }
  const OdomConfig& config() const noexcept { return cfg_; }

 private:
  FeatureClouds deskew(const FeatureClouds& features, const Twist& motion) const;

  OdomConfig cfg_;
  Exec exec_;
  OdomState state_;
  LocalFeatureMap map_;
};

}  // namespace lilo
