#pragma once

#include <vector>

#include "relpose/estimator.hpp"
#include "relpose/measurement.hpp"
#include "relpose/se3.hpp"
#include "relpose/types.hpp"

namespace relpose {

/// How the per-feature velocity readings are produced.
enum class VelocitySource {
  /// Backward-differenced measured positions through the one-pole low-pass.
  filtered,
  /// Exact point velocities plus bump noise of the configured velocity width.
  direct,
  /// Exact point velocities evaluated at the measured positions, so the
  /// recovered twist equals the true twist to machine precision.  This
  /// realizes the exact-measurement premise behind the energy arguments.
  truth,
};

/// True relative twist as a function of time:
/// xi(t) = base + sin(2 pi f t) * amplitude.
struct TwistProfile {
  Twist base;
  Twist amplitude;
  double frequency_hz = 0.0;

  Twist at(double t) const;
};

/// One sample of the generated truth: the relative pose at time t and the
/// body twist carrying it across the following step.
struct TruthSample {
  double t = 0.0;
  Pose g;
  Twist xi;
};

/// Full description of one simulation run.
struct ScenarioConfig {
  double duration = 10.0;  // s
  double dt = 0.01;        // s
  FeatureSet features;
  Pose g0;               // true initial relative pose
  TwistProfile truth_twist;
  NoiseSpec noise;  // support widths plus the seed driving all noise draws
  EstimatorGains gains;
  Pose g_hat0;           // initial pose estimate
  Twist xi_hat0;                   // initial velocity estimate
  VelocitySource velocity_source = VelocitySource::filtered;
  double filter_cutoff_hz = 5.0;  // low-pass corner for the filtered source
  StepperMode mode = StepperMode::lgvi;
  NewtonConfig newton;
  int record_stride = 1;  // keep every stride-th step (the last always kept)

  /// Number of integrator steps, duration / dt (validated integral).
  int step_count() const;
  /// Throws ConfigError naming the offending field on the first violation.
  void validate() const;

  /// Two-vehicle demonstration setup: three beacons on the observed vehicle,
  /// constant true twist, quarter-turn initial attitude error, millimetre
  /// beacon noise through the velocity filter, 10 s at 10 ms steps.
  static ScenarioConfig reference();
};

/// Truth series with step_count() + 1 samples at t = 0, dt, ..., duration.
/// Sample i+1 advances sample i by exp_se3(xi(t_i), dt), the exact flow of
/// g_dot = g xi^ for piecewise-constant twist (first order in dt for smooth
/// time-varying profiles).
std::vector<TruthSample> generate_truth(const ScenarioConfig& config);

/// Streaming measurement pipeline.  Frames must be requested in time order:
/// the noise stream and the velocity filter carry state between samples.
class MeasurementSynthesizer {
 public:
  explicit MeasurementSynthesizer(const ScenarioConfig& config);

  MeasurementFrame synthesize(const TruthSample& sample);

 private:
  const ScenarioConfig& config_;
  BumpNoise noise_;
  VelocityFilter filter_;
};

/// Frames plus the twist reading recovered from each frame.
struct MeasurementSeries {
  std::vector<MeasurementFrame> frames;
  std::vector<Twist> measured_twists;
};

/// Materializes the whole measurement history for a truth series.
MeasurementSeries synthesize_measurements(const std::vector<TruthSample>& truth,
                                          const ScenarioConfig& config);

/// Pointwise estimation error.  Attitude is the principal angle of
/// Q = R R_hat^T; position is logged in both conventions because plotting
/// conventions differ: the group-consistent x = b - Q b_hat and the raw
/// difference b - b_hat.
struct ErrorMetrics {
  double principal_angle = 0.0;      // rad
  Vec3 position = Vec3::Zero();      // b - Q b_hat, m
  Vec3 position_raw = Vec3::Zero();  // b - b_hat, m
  Vec3 omega = Vec3::Zero();         // rad/s
  Vec3 nu = Vec3::Zero();            // m/s
};

ErrorMetrics error_metrics(const Pose& truth, const Twist& xi_true,
                           const Pose& estimate, const Twist& xi_est);

/// One logged sample of a run.
struct RunRecord {
  double t = 0.0;
  Pose truth;
  Pose estimate;
  ErrorMetrics error;
  int newton_iterations = 0;  // zero for the continuous reference stepper
  double energy = 0.0;        // estimator energy at this sample
};

/// Result of one run.  records holds post-step samples (every
/// record_stride-th step plus the final one); the t = 0 sample is kept
/// separately so striding never drops it.
struct RunResult {
  RunRecord initial;
  std::vector<RunRecord> records;
  double max_orthonormality_drift = 0.0;  // max ||R_hat^T R_hat - I||_F
  int max_newton_iterations = 0;
  double worst_newton_residual = 0.0;
  double wall_seconds = 0.0;
};

/// Runs the full pipeline: truth generation, measurement synthesis, twist
/// extraction, and the configured stepper, recording error metrics and
/// energy.  Deterministic: identical configs give bit-identical records.
/// Numerical failures carry the step index.
RunResult run_scenario(const ScenarioConfig& config);

/// Largest error magnitudes over the trailing window of a record series;
/// the radius of the neighborhood the estimate settled into.
struct SteadyStateRadius {
  double attitude = 0.0;  // rad
  double position = 0.0;  // m, group-consistent convention
  double omega = 0.0;     // rad/s
  double nu = 0.0;        // m/s
};

SteadyStateRadius steady_state_radius(const std::vector<RunRecord>& records,
                                      double window_seconds);

}  // namespace relpose
