#include "relpose/measurement.hpp"

#include <cmath>
#include <stdexcept>

#include "relpose/errors.hpp"

namespace relpose {

void FeatureSet::validate() const {
  if (points.size() < 3) {
    throw ConfigError("features: need at least 3 points, got " +
                      std::to_string(points.size()));
  }
  const Mat3X D = pairwise_matrix(points);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
  if (svd.singularValues()(1) <= 1e-9 * svd.singularValues()(0)) {
    throw ConfigError(
        "features: points are collinear, attitude is unobservable");
  }
}

Mat3X pairwise_matrix(const std::vector<Vec3>& points) {
  const std::size_t n = points.size();
  if (n < 2) {
    throw std::invalid_argument("pairwise_matrix: need at least 2 points");
  }
  Mat3X D(3, n * (n - 1) / 2);
  Eigen::Index col = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      D.col(col++) = points[a] - points[b];
    }
  }
  return D;
}

KnownReference KnownReference::from_features(const FeatureSet& features) {
  KnownReference ref;
  ref.D = pairwise_matrix(features.points);
  ref.p_bar = Vec3::Zero();
  for (const Vec3& p : features.points) ref.p_bar += p;
  ref.p_bar /= static_cast<double>(features.points.size());
  return ref;
}

std::vector<Vec3> project_features(const Pose& g, const FeatureSet& features) {
  const Mat3 Rt = g.R.transpose();
  std::vector<Vec3> out;
  out.reserve(features.points.size());
  for (const Vec3& p : features.points) out.push_back(Rt * (p - g.b));
  return out;
}

double BumpNoise::uniform01() {
  // Top 53 bits of the engine output; fixed mapping so streams are
  // bit-reproducible across standard libraries.
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

double BumpNoise::draw(double width) {
  if (width <= 0.0) return 0.0;
  // Rejection sampling against a uniform envelope scaled so the density peak
  // (value e^-1 at x = 0) maps to acceptance 1.
  for (;;) {
    const double u = 2.0 * uniform01() - 1.0;          // in (-1, 1)
    const double q = 1.0 - u * u;
    if (q <= 0.0) continue;
    const double accept = std::exp(1.0 - 1.0 / q);
    if (uniform01() < accept) return 0.5 * width * u;
  }
}

Vec3 BumpNoise::draw_vec3(double width) {
  const double x = draw(width);
  const double y = draw(width);
  const double z = draw(width);
  return {x, y, z};
}

std::vector<Vec3> sample_bump_noise(const NoiseSpec& spec, std::size_t n) {
  BumpNoise noise(spec.seed);
  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(noise.draw_vec3(spec.position_width));
  return out;
}

Eigen::Matrix<double, 3, 6> point_velocity_matrix(const Vec3& a) {
  Eigen::Matrix<double, 3, 6> G;
  G.leftCols<3>() = hat3(a);
  G.rightCols<3>() = -Mat3::Identity();
  return G;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> stack_velocity_system(
    const std::vector<Vec3>& positions, const std::vector<Vec3>& velocities) {
  if (positions.empty() || positions.size() != velocities.size()) {
    throw std::invalid_argument(
        "stack_velocity_system: need matching nonempty position and velocity "
        "lists");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(positions.size());
  Eigen::MatrixXd G(3 * n, 6);
  Eigen::VectorXd V(3 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    G.middleRows<3>(3 * j) = point_velocity_matrix(positions[j]);
    V.segment<3>(3 * j) = velocities[j];
  }
  return {G, V};
}

Twist extract_twist(const std::vector<Vec3>& positions,
                    const std::vector<Vec3>& velocities) {
  const auto [G, V] = stack_velocity_system(positions, velocities);
  if (positions.size() == 1) {
    // Minimum-norm solution through the right pseudo-inverse; the 3x3 normal
    // matrix G G^T = I + |a|^2 I - a a^T is always positive definite.
    const Eigen::Matrix3d GGt = G * G.transpose();
    return Twist::from_vec(G.transpose() * GGt.llt().solve(V));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
  qr.setThreshold(1e-10);
  if (qr.rank() < 6) {
    throw DegenerateGeometryError(
        "extract_twist: stacked velocity system is rank deficient (" +
        std::to_string(positions.size()) +
        " points); twist is not determined");
  }
  return Twist::from_vec(qr.solve(V));
}

VelocityFilter::VelocityFilter(double dt, double cutoff_hz) : dt_(dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("VelocityFilter: dt must be positive");
  }
  if (!(cutoff_hz > 0.0)) {
    throw std::invalid_argument("VelocityFilter: cutoff must be positive");
  }
  alpha_ = std::exp(-2.0 * M_PI * cutoff_hz * dt);
}

std::vector<Vec3> VelocityFilter::update(const std::vector<Vec3>& positions) {
  if (primed_ && positions.size() != previous_.size()) {
    throw std::invalid_argument("VelocityFilter: feature count changed");
  }
  if (!primed_) {
    previous_ = positions;
    state_.assign(positions.size(), Vec3::Zero());
    primed_ = true;
    return state_;
  }
  for (std::size_t j = 0; j < positions.size(); ++j) {
    const Vec3 raw = (positions[j] - previous_[j]) / dt_;
    state_[j] = alpha_ * state_[j] + (1.0 - alpha_) * raw;
  }
  previous_ = positions;
  return state_;
}

void VelocityFilter::reset() {
  primed_ = false;
  previous_.clear();
  state_.clear();
}

std::vector<Vec3> filter_point_velocities(
    const std::vector<std::vector<Vec3>>& history, double dt,
    double cutoff_hz) {
  if (history.empty()) {
    throw std::invalid_argument("filter_point_velocities: empty history");
  }
  VelocityFilter filter(dt, cutoff_hz);
  std::vector<Vec3> out;
  for (const auto& sample : history) out = filter.update(sample);
  return out;
}

void MeasurementFrame::finalize() {
  L = pairwise_matrix(positions);
  a_bar = Vec3::Zero();
  for (const Vec3& a : positions) a_bar += a;
  a_bar /= static_cast<double>(positions.size());
}

}  // namespace relpose
