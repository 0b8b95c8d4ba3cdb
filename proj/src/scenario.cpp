#include "relpose/scenario.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "relpose/errors.hpp"
#include "relpose/so3.hpp"

namespace relpose {
namespace {

TruthSample initial_truth(const ScenarioConfig& config) {
  return {0.0, config.g0, config.truth_twist.at(0.0)};
}

/// Advances one truth sample by its held twist.  Time comes from the step
/// index so long runs accumulate no summation drift.
TruthSample advance_truth(const TruthSample& sample,
                          const TwistProfile& profile, double dt,
                          int next_index) {
  TruthSample next;
  next.t = next_index * dt;
  next.g = compose(sample.g, exp_se3(sample.xi, dt));
  next.xi = profile.at(next.t);
  return next;
}

RunRecord make_record(const TruthSample& truth, const EstimatorState& state,
                      const Twist& xi_meas, const MeasurementFrame& frame,
                      const KnownReference& ref, const EstimatorGains& gains,
                      int newton_iterations) {
  RunRecord record;
  record.t = truth.t;
  record.truth = truth.g;
  record.estimate = state.g_hat;
  record.error = error_metrics(truth.g, truth.xi, state.g_hat,
                               velocity_estimate(state, xi_meas));
  record.newton_iterations = newton_iterations;
  record.energy = estimator_energy(state, frame, ref, gains);
  return record;
}

}  // namespace

Twist TwistProfile::at(double t) const {
  if (frequency_hz == 0.0) {
    return base;
  }
  const double s = std::sin(2.0 * std::numbers::pi * frequency_hz * t);
  return {base.omega + s * amplitude.omega, base.nu + s * amplitude.nu};
}

int ScenarioConfig::step_count() const {
  return static_cast<int>(std::llround(duration / dt));
}

void ScenarioConfig::validate() const {
  if (!(duration > 0.0)) {
    throw ConfigError("duration: must be positive");
  }
  if (!(dt > 0.0)) {
    throw ConfigError("dt: must be positive");
  }
  const double steps = duration / dt;
  if (std::abs(steps - std::round(steps)) > 1e-6 * std::max(1.0, steps)) {
    throw ConfigError("duration: not an integral number of dt steps (" +
                      std::to_string(steps) + ")");
  }
  features.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(features.size());
  gains.validate(n * (n - 1) / 2);
  if (noise.position_width < 0.0) {
    throw ConfigError("noise.position_width: must be nonnegative");
  }
  if (noise.velocity_width < 0.0) {
    throw ConfigError("noise.velocity_width: must be nonnegative");
  }
  if (!(filter_cutoff_hz > 0.0)) {
    throw ConfigError("filter_cutoff_hz: must be positive");
  }
  if (truth_twist.frequency_hz < 0.0) {
    throw ConfigError("truth_twist.frequency_hz: must be nonnegative");
  }
  if (record_stride < 1) {
    throw ConfigError("record_stride: must be at least 1");
  }
  if (newton.max_iterations < 1) {
    throw ConfigError("newton.max_iterations: must be at least 1");
  }
  if (!(newton.tolerance > 0.0)) {
    throw ConfigError("newton.tolerance: must be positive");
  }
  const double g0_drift = rotation_drift(g0.R).orthonormality;
  if (g0_drift > 1e-6) {
    throw ConfigError("g0.R: not a rotation matrix (orthonormality drift " +
                      std::to_string(g0_drift) + ")");
  }
  const double est_drift = rotation_drift(g_hat0.R).orthonormality;
  if (est_drift > 1e-6) {
    throw ConfigError(
        "g_hat0.R: not a rotation matrix (orthonormality drift " +
        std::to_string(est_drift) + ")");
  }
}

ScenarioConfig ScenarioConfig::reference() {
  ScenarioConfig config;
  config.duration = 10.0;
  config.dt = 0.01;
  config.features.points = {Vec3(1.0, 0.0, 0.0), Vec3(0.0, 1.0, 0.0),
                            Vec3(0.0, -1.0, 0.0)};
  config.g0 = {Mat3::Identity(), Vec3(1.5, 5.0, 6.0)};
  config.truth_twist.base = {Vec3::Zero(), Vec3(0.08, -0.003, -0.0007)};
  config.noise.position_width = 0.001;  // 1 mm beacon readings
  config.noise.seed = 1;
  config.gains = EstimatorGains::reference_tuning(3);
  config.g_hat0 = {exp_so3(Vec3(0.0, 0.0, std::numbers::pi / 4.0)),
                   Vec3(-3.0, 2.0, 4.0)};
  config.xi_hat0 = {Vec3(0.1, -0.5, 0.05), Vec3(0.05, -0.09, 0.01)};
  return config;
}

std::vector<TruthSample> generate_truth(const ScenarioConfig& config) {
  config.validate();
  const int n = config.step_count();
  std::vector<TruthSample> series;
  series.reserve(static_cast<std::size_t>(n) + 1);
  series.push_back(initial_truth(config));
  for (int i = 0; i < n; ++i) {
    series.push_back(
        advance_truth(series.back(), config.truth_twist, config.dt, i + 1));
  }
  return series;
}

MeasurementSynthesizer::MeasurementSynthesizer(const ScenarioConfig& config)
    : config_(config),
      noise_(config.noise.seed),
      filter_(config.dt, config.filter_cutoff_hz) {}

MeasurementFrame MeasurementSynthesizer::synthesize(const TruthSample& sample) {
  MeasurementFrame frame;
  frame.t = sample.t;
  const std::vector<Vec3> exact = project_features(sample.g, config_.features);
  frame.positions.reserve(exact.size());
  for (const Vec3& a : exact) {
    frame.positions.push_back(a +
                              noise_.draw_vec3(config_.noise.position_width));
  }
  switch (config_.velocity_source) {
    case VelocitySource::filtered:
      frame.velocities = filter_.update(frame.positions);
      break;
    case VelocitySource::direct:
      frame.velocities.reserve(exact.size());
      for (const Vec3& a : exact) {
        frame.velocities.push_back(
            point_velocity_matrix(a) * sample.xi.vec() +
            noise_.draw_vec3(config_.noise.velocity_width));
      }
      break;
    case VelocitySource::truth:
      frame.velocities.reserve(frame.positions.size());
      for (const Vec3& a : frame.positions) {
        frame.velocities.push_back(point_velocity_matrix(a) *
                                   sample.xi.vec());
      }
      break;
  }
  frame.finalize();
  return frame;
}

MeasurementSeries synthesize_measurements(const std::vector<TruthSample>& truth,
                                          const ScenarioConfig& config) {
  MeasurementSynthesizer synthesizer(config);
  MeasurementSeries series;
  series.frames.reserve(truth.size());
  series.measured_twists.reserve(truth.size());
  for (const TruthSample& sample : truth) {
    series.frames.push_back(synthesizer.synthesize(sample));
    series.measured_twists.push_back(extract_twist(
        series.frames.back().positions, series.frames.back().velocities));
  }
  return series;
}

ErrorMetrics error_metrics(const Pose& truth, const Twist& xi_true,
                           const Pose& estimate, const Twist& xi_est) {
  const Mat3 Q = truth.R * estimate.R.transpose();
  ErrorMetrics metrics;
  metrics.principal_angle = principal_angle(Q);
  metrics.position = truth.b - Q * estimate.b;
  metrics.position_raw = truth.b - estimate.b;
  metrics.omega = xi_true.omega - xi_est.omega;
  metrics.nu = xi_true.nu - xi_est.nu;
  return metrics;
}

RunResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  const int n = config.step_count();
  const KnownReference ref = KnownReference::from_features(config.features);
  MeasurementSynthesizer synthesizer(config);

  TruthSample truth = initial_truth(config);
  MeasurementFrame frame = synthesizer.synthesize(truth);
  Twist xi_meas = extract_twist(frame.positions, frame.velocities);

  EstimatorState state =
      make_initial_state(config.g_hat0, config.xi_hat0, xi_meas);

  RunResult result;
  result.initial =
      make_record(truth, state, xi_meas, frame, ref, config.gains, 0);
  result.max_orthonormality_drift =
      rotation_drift(state.g_hat.R).orthonormality;

  for (int i = 0; i < n; ++i) {
    const TruthSample truth_next =
        advance_truth(truth, config.truth_twist, config.dt, i + 1);
    const MeasurementFrame frame_next = synthesizer.synthesize(truth_next);

    StepDiagnostics diagnostics;
    try {
      if (config.mode == StepperMode::lgvi) {
        state = lgvi_step(state, xi_meas, frame_next, ref, config.gains,
                          config.dt, config.newton, &diagnostics);
      } else {
        state = rk4_step(state, xi_meas, frame, ref, config.gains, config.dt);
      }
    } catch (const NumericalError& err) {
      throw NumericalError("step " + std::to_string(i) + ": " + err.what());
    }
    truth = truth_next;
    frame = frame_next;
    xi_meas = extract_twist(frame.positions, frame.velocities);

    result.max_orthonormality_drift =
        std::max(result.max_orthonormality_drift,
                 rotation_drift(state.g_hat.R).orthonormality);
    result.max_newton_iterations =
        std::max(result.max_newton_iterations, diagnostics.newton_iterations);
    result.worst_newton_residual =
        std::max(result.worst_newton_residual, diagnostics.newton_residual);

    if ((i + 1) % config.record_stride == 0 || i + 1 == n) {
      result.records.push_back(make_record(truth, state, xi_meas, frame, ref,
                                           config.gains,
                                           diagnostics.newton_iterations));
    }
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

SteadyStateRadius steady_state_radius(const std::vector<RunRecord>& records,
                                      double window_seconds) {
  if (records.empty()) {
    throw std::invalid_argument("steady_state_radius: no records");
  }
  if (!(window_seconds > 0.0)) {
    throw std::invalid_argument("steady_state_radius: window must be positive");
  }
  const double t_from = records.back().t - window_seconds;
  SteadyStateRadius radius;
  for (const RunRecord& record : records) {
    if (record.t < t_from) {
      continue;
    }
    radius.attitude = std::max(radius.attitude, record.error.principal_angle);
    radius.position = std::max(radius.position, record.error.position.norm());
    radius.omega = std::max(radius.omega, record.error.omega.norm());
    radius.nu = std::max(radius.nu, record.error.nu.norm());
  }
  return radius;
}

}  // namespace relpose
