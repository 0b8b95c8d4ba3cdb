#include "relpose/estimator.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "relpose/errors.hpp"

namespace relpose {

namespace {

void require_spd(const Eigen::MatrixXd& A, const std::string& name) {
  if (A.rows() != A.cols()) {
    throw ConfigError(name + ": matrix must be square");
  }
  const double asym = (A - A.transpose()).norm();
  if (asym > 1e-12 * std::max(1.0, A.norm())) {
    throw ConfigError(name + ": matrix must be symmetric (asymmetry " +
                      std::to_string(asym) + ")");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (!(min_eig > 0.0)) {
    throw ConfigError(name + ": matrix must be positive definite (min "
                             "eigenvalue " +
                      std::to_string(min_eig) + ")");
  }
}

void check_alignment_dims(const Mat3X& L, const Mat3X& D,
                          const Eigen::MatrixXd& W) {
  if (L.cols() != D.cols() || W.rows() != D.cols() || W.cols() != D.cols()) {
    throw std::invalid_argument(
        "alignment cost: L, D and W column counts must agree");
  }
}

}  // namespace

Mat6 EstimatorGains::inertia() const {
  Mat6 I = Mat6::Zero();
  I.topLeftCorner<3, 3>() = J;
  I.bottomRightCorner<3, 3>() = M;
  return I;
}

Mat6 EstimatorGains::dissipation() const {
  Mat6 D = Mat6::Zero();
  D.topLeftCorner<3, 3>() = Dr;
  D.bottomRightCorner<3, 3>() = Dt;
  return D;
}

void EstimatorGains::validate(Eigen::Index pair_count) const {
  require_spd(J, "gains.J");
  require_spd(M, "gains.M");
  require_spd(Dr, "gains.Dr");
  require_spd(Dt, "gains.Dt");
  if (!(kappa > 0.0)) {
    throw ConfigError("gains.kappa: must be positive, got " +
                      std::to_string(kappa));
  }
  if (W.rows() != pair_count || W.cols() != pair_count) {
    throw ConfigError("gains.W: expected " + std::to_string(pair_count) + "x" +
                      std::to_string(pair_count) + " weights, got " +
                      std::to_string(W.rows()) + "x" +
                      std::to_string(W.cols()));
  }
  require_spd(W, "gains.W");
  if (phi.value(0.0) != 0.0) {
    throw ConfigError("gains.phi: shaping must vanish at zero");
  }
  for (double x : {0.0, 0.1, 1.0, 10.0, 100.0, 1e4}) {
    if (!(phi.slope(x) > 0.0)) {
      throw ConfigError("gains.phi: shaping slope must stay positive (fails "
                        "at x = " +
                        std::to_string(x) + ")");
    }
  }
}

EstimatorGains EstimatorGains::reference_tuning(Eigen::Index pair_count) {
  EstimatorGains gains;
  gains.J = Vec3(0.9, 0.6, 0.3).asDiagonal();
  gains.M = Vec3(0.0608, 0.0486, 0.0365).asDiagonal();
  gains.Dr = Vec3(2.7, 2.2, 1.5).asDiagonal();
  gains.Dt = Vec3(0.1, 0.12, 0.14).asDiagonal();
  gains.kappa = 1.0;
  gains.W = Eigen::MatrixXd::Identity(pair_count, pair_count);
  return gains;
}

EstimatorState make_initial_state(const Pose& g_hat0, const Twist& xi_hat0,
                                  const Twist& xi_meas0) {
  EstimatorState state;
  state.g_hat = g_hat0;
  state.phi = VelocityError::from_vec(adjoint_matrix(g_hat0) *
                                      (xi_meas0.vec() - xi_hat0.vec()));
  state.xi_hat = xi_hat0;
  return state;
}

Twist velocity_estimate(const EstimatorState& state, const Twist& xi_meas) {
  return Twist::from_vec(xi_meas.vec() - adjoint_matrix(inverse(state.g_hat)) *
                                             state.phi.vec());
}

double wahba_cost(const Mat3& R_hat, const Mat3X& L, const Mat3X& D,
                  const Eigen::MatrixXd& W) {
  check_alignment_dims(L, D, W);
  const Mat3X E = D - R_hat * L;
  return 0.5 * (E.cwiseProduct(E * W)).sum();
}

Vec3 s_gamma(const Mat3& R_hat, const Mat3X& L, const Mat3X& D,
             const Eigen::MatrixXd& W) {
  check_alignment_dims(L, D, W);
  const Mat3 A = D * W * L.transpose() * R_hat.transpose() -
                 R_hat * L * W * D.transpose();
  return vee3(A);
}

TranslationalPotential translational_potential(const Pose& g_hat,
                                               const Vec3& a_bar,
                                               const Vec3& p_bar,
                                               double kappa) {
  const Vec3 y = p_bar - g_hat.R * a_bar - g_hat.b;
  return {y, 0.5 * kappa * y.squaredNorm()};
}

double total_potential(const Pose& g_hat, const MeasurementFrame& frame,
                       const KnownReference& ref, const EstimatorGains& gains) {
  const double aligned = wahba_cost(g_hat.R, frame.L, ref.D, gains.W);
  return gains.phi.value(aligned) +
         translational_potential(g_hat, frame.a_bar, ref.p_bar, gains.kappa)
             .value;
}

Vec6 z_vector(const Pose& g_hat, const MeasurementFrame& frame,
              const KnownReference& ref, const EstimatorGains& gains) {
  const double aligned = wahba_cost(g_hat.R, frame.L, ref.D, gains.W);
  const Vec3 sg = s_gamma(g_hat.R, frame.L, ref.D, gains.W);
  const Vec3 y =
      translational_potential(g_hat, frame.a_bar, ref.p_bar, gains.kappa).y;
  Vec6 Z;
  Z.head<3>() = gains.phi.slope(aligned) * sg +
                gains.kappa * ref.p_bar.cross(y);
  Z.tail<3>() = gains.kappa * y;
  return Z;
}

double estimator_energy(const EstimatorState& state,
                        const MeasurementFrame& frame,
                        const KnownReference& ref,
                        const EstimatorGains& gains) {
  const Vec6 phi = state.phi.vec();
  return 0.5 * phi.dot(gains.inertia() * phi) +
         total_potential(state.g_hat, frame, ref, gains);
}

ContinuousRates continuous_rates(const EstimatorState& state,
                                 const Twist& xi_meas,
                                 const MeasurementFrame& frame,
                                 const KnownReference& ref,
                                 const EstimatorGains& gains) {
  const Vec6 phi = state.phi.vec();
  const Vec6 momentum = gains.inertia() * phi;
  const Vec6 force = ad_star(Twist::from_vec(phi)) * momentum -
                     z_vector(state.g_hat, frame, ref, gains) -
                     gains.dissipation() * phi;
  return {gains.inertia().ldlt().solve(force),
          velocity_estimate(state, xi_meas)};
}

EstimatorState rk4_step(const EstimatorState& state, const Twist& xi_meas,
                        const MeasurementFrame& frame,
                        const KnownReference& ref, const EstimatorGains& gains,
                        double dt) {
  // Integrate (sigma, phi) where the pose is g_hat exp(sigma): the chart
  // coordinate obeys sigma_dot = dexpinv_{-sigma}(xi_hat).
  struct ChartRates {
    Vec6 sigma_dot;
    Vec6 phi_dot;
  };
  const auto rates = [&](const Vec6& sigma, const Vec6& phi) -> ChartRates {
    EstimatorState s;
    s.g_hat = compose(state.g_hat, exp_se3(Twist::from_vec(sigma), 1.0));
    s.phi = VelocityError::from_vec(phi);
    const ContinuousRates r = continuous_rates(s, xi_meas, frame, ref, gains);
    return {dexpinv_matrix(-sigma) * r.xi_hat.vec(), r.phi_dot};
  };

  const Vec6 sigma0 = Vec6::Zero();
  const Vec6 phi0 = state.phi.vec();
  const ChartRates k1 = rates(sigma0, phi0);
  const ChartRates k2 = rates(sigma0 + 0.5 * dt * k1.sigma_dot,
                              phi0 + 0.5 * dt * k1.phi_dot);
  const ChartRates k3 = rates(sigma0 + 0.5 * dt * k2.sigma_dot,
                              phi0 + 0.5 * dt * k2.phi_dot);
  const ChartRates k4 =
      rates(sigma0 + dt * k3.sigma_dot, phi0 + dt * k3.phi_dot);

  const Vec6 sigma = (dt / 6.0) * (k1.sigma_dot + 2.0 * k2.sigma_dot +
                                   2.0 * k3.sigma_dot + k4.sigma_dot);
  const Vec6 phi = phi0 + (dt / 6.0) * (k1.phi_dot + 2.0 * k2.phi_dot +
                                        2.0 * k3.phi_dot + k4.phi_dot);

  EstimatorState next;
  next.g_hat = compose(state.g_hat, exp_se3(Twist::from_vec(sigma), 1.0));
  next.phi = VelocityError::from_vec(phi);
  next.xi_hat = velocity_estimate(state, xi_meas);
  return next;
}

NewtonResult solve_relative_rotation(const Vec3& omega, const Mat3& J,
                                     double dt, const NewtonConfig& cfg) {
  const Mat3 Jc = 0.5 * J.trace() * Mat3::Identity() - J;
  const Mat3 target = dt * hat3(J * omega);

  Vec3 f = dt * omega;
  Mat3 F = exp_so3(f);
  const auto residual_of = [&](const Mat3& Fi) {
    return Mat3(target - (Fi * Jc - Jc * Fi.transpose()));
  };
  Mat3 res_mat = residual_of(F);
  double res = res_mat.norm();

  for (int it = 0; it <= cfg.max_iterations; ++it) {
    if (res <= cfg.tolerance) {
      return {F, it, res};
    }
    if (it == cfg.max_iterations) break;

    // d residual / d f in the exponential chart: perturbing f by delta moves
    // F by F hat(Jr delta) with Jr the right Jacobian at f.
    const Mat3 Jr = so3_right_jacobian(f);
    Mat3 jac;
    for (int k = 0; k < 3; ++k) {
      const Mat3 U = hat3(Vec3(Jr.col(k)));
      jac.col(k) = -vee3(Mat3(F * U * Jc + Jc * U * F.transpose()), 1e-6);
    }
    Vec3 step = jac.partialPivLu().solve(-vee3(res_mat, 1e-6));
    if (!step.allFinite()) {
      // Chart Jacobian went singular; fall back to central differences.
      const double h = 1e-7;
      for (int k = 0; k < 3; ++k) {
        Vec3 fp = f, fm = f;
        fp[k] += h;
        fm[k] -= h;
        jac.col(k) = (vee3(residual_of(exp_so3(fp)), 1e-6) -
                      vee3(residual_of(exp_so3(fm)), 1e-6)) /
                     (2.0 * h);
      }
      step = jac.partialPivLu().solve(-vee3(res_mat, 1e-6));
      if (!step.allFinite()) break;
    }
    f += step;
    F = exp_so3(f);
    res_mat = residual_of(F);
    res = res_mat.norm();
  }
  char res_text[32];
  std::snprintf(res_text, sizeof(res_text), "%.3e", res);
  throw NewtonError("relative-rotation solve: no convergence after " +
                        std::to_string(cfg.max_iterations) + " iterations (residual " +
                        res_text + ")",
                    res, cfg.max_iterations);
}

EstimatorState lgvi_step(const EstimatorState& state, const Twist& xi_meas,
                         const MeasurementFrame& frame_next,
                         const KnownReference& ref,
                         const EstimatorGains& gains, double dt,
                         const NewtonConfig& cfg,
                         StepDiagnostics* diagnostics) {
  const Twist xi_hat = velocity_estimate(state, xi_meas);
  const Pose g_next = compose(state.g_hat, exp_se3(xi_hat, dt));

  const NewtonResult newton =
      solve_relative_rotation(state.phi.omega, gains.J, dt, cfg);
  if (diagnostics != nullptr) {
    diagnostics->newton_iterations = newton.iterations;
    diagnostics->newton_residual = newton.residual;
  }
  const Mat3 Ft = newton.F.transpose();

  // c is the negated centroid offset at the new time.
  const Vec3 c = g_next.b + g_next.R * frame_next.a_bar - ref.p_bar;
  const Vec3 upsilon_next =
      (gains.M + dt * gains.Dt)
          .ldlt()
          .solve(Ft * (gains.M * state.phi.upsilon) + dt * gains.kappa * c);

  const double aligned = wahba_cost(g_next.R, frame_next.L, ref.D, gains.W);
  const Vec3 sg = s_gamma(g_next.R, frame_next.L, ref.D, gains.W);
  const Vec3 rhs = Ft * (gains.J * state.phi.omega) +
                   dt * (gains.M * upsilon_next).cross(upsilon_next) +
                   dt * gains.kappa * ref.p_bar.cross(c) -
                   dt * gains.phi.slope(aligned) * sg;
  const Vec3 omega_next = (gains.J + dt * gains.Dr).ldlt().solve(rhs);

  EstimatorState next;
  next.g_hat = g_next;
  next.phi = {omega_next, upsilon_next};
  next.xi_hat = xi_hat;
  return next;
}

EstimatorRun run_estimator(const EstimatorState& initial,
                           const std::vector<MeasurementFrame>& frames,
                           const std::vector<Twist>& measured_twists,
                           const KnownReference& ref,
                           const EstimatorGains& gains, double dt,
                           StepperMode mode, const NewtonConfig& cfg) {
  if (frames.empty()) {
    throw std::invalid_argument("run_estimator: need at least one frame");
  }
  if (measured_twists.size() != frames.size()) {
    throw std::invalid_argument(
        "run_estimator: one measured twist per frame required");
  }
  EstimatorRun run;
  run.states.reserve(frames.size());
  run.states.push_back(initial);
  run.diagnostics.resize(frames.size() - 1);

  for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
    try {
      if (mode == StepperMode::lgvi) {
        run.states.push_back(lgvi_step(run.states.back(), measured_twists[i],
                                       frames[i + 1], ref, gains, dt, cfg,
                                       &run.diagnostics[i]));
      } else {
        run.states.push_back(rk4_step(run.states.back(), measured_twists[i],
                                      frames[i], ref, gains, dt));
      }
    } catch (const NumericalError& err) {
      throw NumericalError("step " + std::to_string(i) + ": " + err.what());
    }
  }
  return run;
}

}  // namespace relpose
