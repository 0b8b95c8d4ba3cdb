#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "relpose/se3.hpp"
#include "relpose/types.hpp"

namespace relpose {

/// Feature points expressed in the observed vehicle's frame.  The estimator
/// needs their pairwise-difference matrix to have rank >= 2 (at least three
/// points, not all collinear) so that attitude is observable.
struct FeatureSet {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  /// Throws ConfigError when the geometry cannot pin attitude.
  void validate() const;
};

/// Columns are differences p_a - p_b over index pairs a < b in lexicographic
/// order, so beta = n(n-1)/2 columns for n points.  Throws
/// std::invalid_argument for fewer than two points.
Mat3X pairwise_matrix(const std::vector<Vec3>& points);

/// Quantities derived from the known feature geometry once per scenario.
struct KnownReference {
  Mat3X D;     // pairwise differences of the known points
  Vec3 p_bar;  // centroid of the known points

  static KnownReference from_features(const FeatureSet& features);
};

/// Feature positions seen from the observer: a_j = R^T (p_j - b).
std::vector<Vec3> project_features(const Pose& g, const FeatureSet& features);

/// Compact-support noise for measurement corruption.  Widths are the full
/// support diameter; zero width disables the corresponding channel.
struct NoiseSpec {
  double position_width = 0.0;   // m, per component of each feature position
  double velocity_width = 0.0;   // m/s, used only by direct velocity readings
  std::uint64_t seed = 0;
};

/// Deterministic sampler for the bump density exp(-1 / (1 - (2x/w)^2)) on
/// (-w/2, w/2).  All randomness flows through the explicit engine state; the
/// same seed yields the same stream on any platform.
class BumpNoise {
 public:
  explicit BumpNoise(std::uint64_t seed) : rng_(seed) {}

  /// One scalar draw from the bump density with the given support width.
  double draw(double width);
  /// One 3-vector of independent draws.
  Vec3 draw_vec3(double width);

 private:
  double uniform01();
  std::mt19937_64 rng_;
};

/// n independent 3-vector draws using spec.seed and spec.position_width.
std::vector<Vec3> sample_bump_noise(const NoiseSpec& spec, std::size_t n);

/// Velocity of a feature at body-frame position a under twist xi is
/// point_velocity_matrix(a) * xi.vec().
Eigen::Matrix<double, 3, 6> point_velocity_matrix(const Vec3& a);

/// Stacked linear system G * xi = V over all features.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> stack_velocity_system(
    const std::vector<Vec3>& positions, const std::vector<Vec3>& velocities);

/// Least-squares twist from point positions and velocities.  Three or more
/// noncollinear points determine the twist uniquely; a single point yields the
/// minimum-norm solution.  Throws DegenerateGeometryError when the stacked
/// system is rank deficient (collinear points, or exactly two points, whose
/// system always has a one-dimensional null space).
Twist extract_twist(const std::vector<Vec3>& positions,
                    const std::vector<Vec3>& velocities);

/// Backward-difference point velocities smoothed by a one-pole low-pass.
/// The first sample has no predecessor and reports zero velocity.
class VelocityFilter {
 public:
  VelocityFilter(double dt, double cutoff_hz);

  std::vector<Vec3> update(const std::vector<Vec3>& positions);
  void reset();

 private:
  double dt_;
  double alpha_;  // pole location exp(-2 pi f_c dt)
  bool primed_ = false;
  std::vector<Vec3> previous_;
  std::vector<Vec3> state_;
};

/// Convenience over a whole position history: returns the filtered velocities
/// at the final sample.  history[k][j] is feature j at sample k.
std::vector<Vec3> filter_point_velocities(
    const std::vector<std::vector<Vec3>>& history, double dt,
    double cutoff_hz);

/// One time-stamped set of optical measurements.
struct MeasurementFrame {
  double t = 0.0;
  std::vector<Vec3> positions;   // measured a_j
  std::vector<Vec3> velocities;  // measured da_j/dt
  Mat3X L;                       // pairwise differences of measured positions
  Vec3 a_bar = Vec3::Zero();     // centroid of measured positions

  /// Assembles L and a_bar from the stored positions.
  void finalize();
};

}  // namespace relpose
