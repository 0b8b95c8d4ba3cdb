#pragma once

#include <vector>

#include "relpose/measurement.hpp"
#include "relpose/se3.hpp"
#include "relpose/types.hpp"

namespace relpose {

/// Shaping applied to the attitude alignment cost before it enters the total
/// potential: Phi(x) = x + quadratic * x^2.  The identity shaping
/// (quadratic = 0) is the default; any quadratic >= 0 keeps Phi(0) = 0 and
/// Phi' > 0 on x >= 0, which the stability argument requires.
struct PotentialShaping {
  double quadratic = 0.0;

  double value(double x) const { return x + quadratic * x * x; }
  double slope(double x) const { return 1.0 + 2.0 * quadratic * x; }
};

/// Virtual inertia, dissipation, and potential weights of the estimator.
/// These are tuning parameters, not physical properties of either vehicle.
struct EstimatorGains {
  Mat3 J = Mat3::Identity();   // rotational inertia
  Mat3 M = Mat3::Identity();   // translational inertia
  Mat3 Dr = Mat3::Identity();  // rotational dissipation
  Mat3 Dt = Mat3::Identity();  // translational dissipation
  double kappa = 1.0;          // translational potential stiffness
  Eigen::MatrixXd W;           // alignment weights, one row/col per pair
  PotentialShaping phi;

  /// Block-diagonal 6x6 inertia diag(J, M).
  Mat6 inertia() const;
  /// Block-diagonal 6x6 dissipation diag(Dr, Dt).
  Mat6 dissipation() const;

  /// Throws ConfigError unless J, M, Dr, Dt and W (sized pair_count) are
  /// symmetric positive definite, kappa > 0, and the shaping slope is
  /// positive over a sampled range.
  void validate(Eigen::Index pair_count) const;

  /// The tuning used by the bundled demo scenario.
  static EstimatorGains reference_tuning(Eigen::Index pair_count);
};

/// Filter state: pose estimate, transported velocity error, and the twist
/// estimate that produced the current pose (kept for reporting).
struct EstimatorState {
  Pose g_hat;
  VelocityError phi;
  Twist xi_hat;
};

/// phi_0 = Ad_{g_hat} (xi_meas - xi_hat); the stored xi_hat starts as the
/// supplied estimate.
EstimatorState make_initial_state(const Pose& g_hat0, const Twist& xi_hat0,
                                  const Twist& xi_meas0);

/// Velocity estimate implied by the stored error and the current twist
/// reading: xi_hat = xi_meas - Ad_{g_hat^-1} phi.  Inverts
/// make_initial_state exactly.
Twist velocity_estimate(const EstimatorState& state, const Twist& xi_meas);

/// Attitude alignment cost 1/2 <D - R L, (D - R L) W>.  Dimensions of L, D
/// and W must agree.
double wahba_cost(const Mat3& R_hat, const Mat3X& L, const Mat3X& D,
                  const Eigen::MatrixXd& W);

/// Attitude gradient vector: vex(D W L^T R^T - R L W D^T).  The matrix
/// argument is skew-symmetric by construction for symmetric W.
Vec3 s_gamma(const Mat3& R_hat, const Mat3X& L, const Mat3X& D,
             const Eigen::MatrixXd& W);

/// Translational offset y = p_bar - R_hat a_bar - b_hat between the known and
/// measured centroids, with its quadratic cost 1/2 kappa |y|^2.
struct TranslationalPotential {
  Vec3 y;
  double value;
};
TranslationalPotential translational_potential(const Pose& g_hat,
                                               const Vec3& a_bar,
                                               const Vec3& p_bar,
                                               double kappa);

/// Phi(alignment cost) + translational cost.
double total_potential(const Pose& g_hat, const MeasurementFrame& frame,
                       const KnownReference& ref, const EstimatorGains& gains);

/// Gradient forcing on the velocity error:
/// Z = [Phi'(U) s_gamma + kappa hat(p_bar) y; kappa y].
Vec6 z_vector(const Pose& g_hat, const MeasurementFrame& frame,
              const KnownReference& ref, const EstimatorGains& gains);

/// 1/2 phi^T inertia phi + total potential: the Lyapunov energy audited by
/// the dissipation tests.
double estimator_energy(const EstimatorState& state,
                        const MeasurementFrame& frame,
                        const KnownReference& ref,
                        const EstimatorGains& gains);

/// Right-hand side of the continuous filter:
/// inertia * phi_dot = ad*_phi(inertia phi) - Z - dissipation phi, with the
/// applied twist xi_hat = xi_meas - Ad_{g_hat^-1} phi.
struct ContinuousRates {
  Vec6 phi_dot;
  Twist xi_hat;
};
ContinuousRates continuous_rates(const EstimatorState& state,
                                 const Twist& xi_meas,
                                 const MeasurementFrame& frame,
                                 const KnownReference& ref,
                                 const EstimatorGains& gains);

/// Classical fourth-order step of the continuous filter, integrated in the
/// exponential chart centred at the current pose so the estimate never leaves
/// the group.  Measurements are held over the step.
EstimatorState rk4_step(const EstimatorState& state, const Twist& xi_meas,
                        const MeasurementFrame& frame,
                        const KnownReference& ref, const EstimatorGains& gains,
                        double dt);

struct NewtonConfig {
  double tolerance = 1e-12;  // Frobenius norm of the residual matrix
  int max_iterations = 50;
};

struct NewtonResult {
  Mat3 F;
  int iterations;
  double residual;
};

/// Solves the implicit relative-rotation equation
///   dt * hat(J omega) = F Jc - Jc F^T,  Jc = trace(J)/2 I - J,
/// for F in SO(3) by Newton iteration in the exponential chart, seeded with
/// F = exp(dt omega), which is first-order exact.  Throws NewtonError if the
/// tolerance is not met within the iteration budget.
NewtonResult solve_relative_rotation(const Vec3& omega, const Mat3& J,
                                     double dt, const NewtonConfig& cfg = {});

struct StepDiagnostics {
  int newton_iterations = 0;
  double newton_residual = 0.0;
};

/// One step of the discrete variational integrator.  In order: the applied
/// twist xi_hat is formed from the incoming state, the pose advances by its
/// exponential, the relative rotation F is solved implicitly, then the
/// translational and rotational velocity errors update against the
/// measurements at the new time.
EstimatorState lgvi_step(const EstimatorState& state, const Twist& xi_meas,
                         const MeasurementFrame& frame_next,
                         const KnownReference& ref,
                         const EstimatorGains& gains, double dt,
                         const NewtonConfig& cfg = {},
                         StepDiagnostics* diagnostics = nullptr);

enum class StepperMode { lgvi, rk4 };

/// States indexed per sample (size frames.size()) plus per-step diagnostics.
struct EstimatorRun {
  std::vector<EstimatorState> states;
  std::vector<StepDiagnostics> diagnostics;
};

/// Runs either stepper over a frame sequence.  measured_twists[i] is the
/// twist reading consumed by step i; the variational stepper additionally
/// consumes frames[i + 1].  Numerical failures are rethrown with the step
/// index attached.
EstimatorRun run_estimator(const EstimatorState& initial,
                           const std::vector<MeasurementFrame>& frames,
                           const std::vector<Twist>& measured_twists,
                           const KnownReference& ref,
                           const EstimatorGains& gains, double dt,
                           StepperMode mode, const NewtonConfig& cfg = {});

}  // namespace relpose
