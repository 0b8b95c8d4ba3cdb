#include "relpose/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "relpose/estimator.hpp"
#include "relpose/measurement.hpp"
#include "relpose/scenario.hpp"
#include "relpose/se3.hpp"
#include "relpose/so3.hpp"
#include "relpose/sweep.hpp"

namespace relpose {
namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 random_vec3(Rng& rng, double scale) {
  return Vec3(uniform(rng, -scale, scale), uniform(rng, -scale, scale),
              uniform(rng, -scale, scale));
}

Vec3 random_axis(Rng& rng) {
  while (true) {
    const Vec3 v = random_vec3(rng, 1.0);
    const double n = v.norm();
    if (n > 1e-3 && n <= 1.0) {
      return v / n;
    }
  }
}

Mat3 random_rotation(Rng& rng, double max_angle) {
  return exp_so3(uniform(rng, 0.0, max_angle) * random_axis(rng));
}

std::string format(const char* spec, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), spec, value);
  return buffer;
}

MeasurementFrame exact_frame(const Pose& g, const FeatureSet& features,
                             double t) {
  MeasurementFrame frame;
  frame.t = t;
  frame.positions = project_features(g, features);
  frame.velocities.assign(frame.positions.size(), Vec3::Zero());
  frame.finalize();
  return frame;
}

// The base scenario with the noise removed but the measurement pipeline
// (velocity filter included) left in place.
ScenarioConfig noise_free(const ScenarioConfig& base) {
  ScenarioConfig config = base;
  config.noise.position_width = 0.0;
  config.noise.velocity_width = 0.0;
  return config;
}

// Noise-free with exact twist readings: the premise behind the energy and
// integrator-order checks.
ScenarioConfig exact(const ScenarioConfig& base) {
  ScenarioConfig config = noise_free(base);
  config.velocity_source = VelocitySource::truth;
  return config;
}

// ---------------------------------------------------------------------------
// 1. Demonstration scenario: both error channels decay below 10% of their
//    initial size and stay there; the run finishes within the time budget.
CriterionResult check_demonstration_run(const ScenarioConfig& base) {
  CriterionResult result;
  result.id = 1;
  result.name = "demonstration run converges within budget";
  const RunResult run = run_scenario(base);

  const double angle0 = run.initial.error.principal_angle;
  const double pos0 = run.initial.error.position_raw.norm();
  const double angle_T = run.records.back().error.principal_angle;
  const double pos_T = run.records.back().error.position_raw.norm();

  // Largest excursion over the trailing 2 s: "stays converged".
  const double t_tail = run.records.back().t - 2.0;
  double angle_tail = 0.0;
  double pos_tail = 0.0;
  for (const RunRecord& record : run.records) {
    if (record.t < t_tail) {
      continue;
    }
    angle_tail = std::max(angle_tail, record.error.principal_angle);
    pos_tail = std::max(pos_tail, record.error.position_raw.norm());
  }

  result.passed = angle_T < 0.1 * angle0 && pos_T < 0.1 * pos0 &&
                  angle_tail < 0.1 * angle0 && pos_tail < 0.1 * pos0 &&
                  run.wall_seconds < 5.0;
  result.detail = "attitude " + format("%.3f", angle0) + " -> " +
                  format("%.2e", angle_T) + " rad, position " +
                  format("%.3f", pos0) + " -> " + format("%.2e", pos_T) +
                  " m, trailing-2s maxima " + format("%.2e", angle_tail) +
                  " rad / " + format("%.2e", pos_tail) + " m, " +
                  format("%.2f", run.wall_seconds) + " s wall (budget 5 s)";
  return result;
}

// ---------------------------------------------------------------------------
// 2. Noise-free asymptotics: by 60 s both errors are below 1e-3.
CriterionResult check_noise_free_convergence(const ScenarioConfig& base) {
  CriterionResult result;
  result.id = 2;
  result.name = "noise-free errors vanish by 60 s";
  ScenarioConfig config = noise_free(base);
  config.duration = 60.0;
  config.record_stride = 100;
  const RunResult run = run_scenario(config);

  const double angle_T = run.records.back().error.principal_angle;
  const double pos_T = run.records.back().error.position_raw.norm();
  result.passed = angle_T < 1e-3 && pos_T < 1e-3;
  result.detail = "terminal attitude " + format("%.2e", angle_T) +
                  " rad (limit 1e-3), position " + format("%.2e", pos_T) +
                  " m (limit 1e-3)";
  return result;
}

// ---------------------------------------------------------------------------
// 3. Energy decay: the estimator energy must not rise at any step beyond a
//    1e-9 slack, in every noise-free run.
struct EnergyAudit {
  int rises = 0;
  double worst_rise = 0.0;
};

EnergyAudit audit_energy(const RunResult& run) {
  EnergyAudit audit;
  double previous = run.initial.energy;
  for (const RunRecord& record : run.records) {
    const double rise = record.energy - previous;
    if (rise > 1e-9) {
      ++audit.rises;
      audit.worst_rise = std::max(audit.worst_rise, rise);
    }
    previous = record.energy;
  }
  return audit;
}

CriterionResult check_energy_decay(const ScenarioConfig& base) {
  CriterionResult result;
  result.id = 3;
  result.name = "estimator energy decays monotonically";

  // The demonstration step size.
  ScenarioConfig coarse = exact(base);
  const EnergyAudit coarse_audit = audit_energy(run_scenario(coarse));

  // The same run at a tenth of the step size.
  ScenarioConfig fine = exact(base);
  fine.dt = 1e-3;
  const EnergyAudit fine_audit = audit_energy(run_scenario(fine));

  // Random starts at the fine step size.
  Rng rng(9003);
  int random_rises = 0;
  double random_worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    ScenarioConfig config = exact(base);
    config.dt = 1e-3;
    config.duration = 5.0;
    config.g_hat0.R = random_rotation(rng, 2.5);
    config.g_hat0.b = config.g0.b + random_vec3(rng, 3.0);
    config.xi_hat0.omega = random_vec3(rng, 0.3);
    config.xi_hat0.nu = random_vec3(rng, 0.3);
    const EnergyAudit audit = audit_energy(run_scenario(config));
    random_rises += audit.rises;
    random_worst = std::max(random_worst, audit.worst_rise);
  }

  result.passed =
      coarse_audit.rises == 0 && fine_audit.rises == 0 && random_rises == 0;
  result.detail =
      "slack 1e-9; dt=0.01 demonstration start: " +
      std::to_string(coarse_audit.rises) + " rises (worst " +
      format("%.1e", coarse_audit.worst_rise) + "); dt=0.001 same start: " +
      std::to_string(fine_audit.rises) + " rises; dt=0.001, 3 random starts: " +
      std::to_string(random_rises) + " rises (worst " +
      format("%.1e", random_worst) + ")";
  if (!result.passed) {
    result.detail +=
        "; the discrete flow superposes an energy wobble of order step^2 "
        "(growing with the transient) on the order-step damping, so "
        "per-step decay within 1e-9 holds only for small steps and mild "
        "transients, not at the demonstration rate";
  }
  return result;
}

// ---------------------------------------------------------------------------
// 4. Implicit step: Newton residual at most 1e-12 and at most 10 iterations
//    at every one of 1e4 steps.
CriterionResult check_newton_solve(const ScenarioConfig& base) {
  CriterionResult result;
  result.id = 4;
  result.name = "implicit rotation solve stays tight";
  ScenarioConfig config = base;
  config.duration = 100.0;  // 1e4 steps at the demonstration rate
  config.record_stride = 100;
  const RunResult run = run_scenario(config);

  result.passed =
      run.worst_newton_residual <= 1e-12 && run.max_newton_iterations <= 10;
  result.detail = std::to_string(config.step_count()) +
                  " steps: worst residual " +
                  format("%.2e", run.worst_newton_residual) +
                  " (limit 1e-12), max iterations " +
                  std::to_string(run.max_newton_iterations) + " (limit 10)";
  return result;
}

// ---------------------------------------------------------------------------
// 5. Group structure: after 1e6 steps without re-orthonormalization the
//    attitude estimate stays a rotation to 1e-8.
CriterionResult check_structure_preservation(const ScenarioConfig& base) {
  CriterionResult result;
  result.id = 5;
  result.name = "million-step run stays on the rotation group";
  ScenarioConfig config = exact(base);
  config.duration = 1e6 * config.dt;  // one million steps
  config.record_stride = 1000;
  config.truth_twist.base.omega = Vec3(0.02, -0.015, 0.01);
  config.truth_twist.amplitude = {Vec3(0.05, 0.03, -0.04),
                                  Vec3(0.05, 0.02, 0.01)};
  config.truth_twist.frequency_hz = 0.05;
  const RunResult run = run_scenario(config);

  result.passed = run.max_orthonormality_drift < 1e-8;
  result.detail = std::to_string(config.step_count()) +
                  " steps: max ||R^T R - I||_F " +
                  format("%.2e", run.max_orthonormality_drift) +
                  " (limit 1e-8), " + format("%.1f", run.wall_seconds) +
                  " s wall";
  return result;
}

// ---------------------------------------------------------------------------
// 6. Twist recovery inverts the forward point-velocity model on 1000 random
//    (pose, twist, geometry) triples.
CriterionResult check_twist_recovery(const ScenarioConfig&) {
  CriterionResult result;
  result.id = 6;
  result.name = "twist recovery inverts the point-velocity model";
  Rng rng(9006);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    FeatureSet features;
    do {
      features.points = {random_vec3(rng, 2.0), random_vec3(rng, 2.0),
                         random_vec3(rng, 2.0)};
    } while (((features.points[1] - features.points[0])
                  .cross(features.points[2] - features.points[0]))
                 .norm() < 0.5);

    const Pose g{random_rotation(rng, std::numbers::pi),
                 random_vec3(rng, 3.0)};
    Twist xi;
    xi.omega = random_vec3(rng, 2.0);
    xi.nu = random_vec3(rng, 2.0);

    const std::vector<Vec3> positions = project_features(g, features);
    std::vector<Vec3> velocities;
    velocities.reserve(positions.size());
    for (const Vec3& a : positions) {
      velocities.push_back(point_velocity_matrix(a) * xi.vec());
    }

    const Twist recovered = extract_twist(positions, velocities);
    const double error = (recovered.vec() - xi.vec()).norm() /
                         std::max(1.0, xi.vec().norm());
    worst = std::max(worst, error);
  }
  result.passed = worst <= 1e-10;
  result.detail =
      "1000 random triples: worst error " + format("%.2e", worst) +
      " (limit 1e-10)";
  return result;
}

// ---------------------------------------------------------------------------
// 7. The forcing vector equals the (left-trivialized) gradient of the total
//    potential, checked against central differences.
CriterionResult check_potential_gradient(const ScenarioConfig& base) {
  CriterionResult result;
  result.id = 7;
  result.name = "forcing vector matches potential gradients";
  Rng rng(9007);
  const FeatureSet& features = base.features;
  const KnownReference reference = KnownReference::from_features(features);
  const double eps = 1e-6;
  double worst = 0.0;

  for (double quadratic : {0.0, 0.5}) {
    EstimatorGains gains = base.gains;
    gains.phi.quadratic = quadratic;
    for (int trial = 0; trial < 50; ++trial) {
      const Pose g_truth{random_rotation(rng, std::numbers::pi),
                         random_vec3(rng, 3.0)};
      const MeasurementFrame frame = exact_frame(g_truth, features, 0.0);
      const Pose g_hat{random_rotation(rng, std::numbers::pi),
                       random_vec3(rng, 3.0)};
      const Vec6 Z = z_vector(g_hat, frame, reference, gains);

      for (int k = 0; k < 6; ++k) {
        Vec6 eta = Vec6::Zero();
        eta[k] = 1.0;
        const double fd =
            (total_potential(compose(exp_se3(Twist::from_vec(eta), -eps),
                                     g_hat),
                             frame, reference, gains) -
             total_potential(compose(exp_se3(Twist::from_vec(eta), eps),
                                     g_hat),
                             frame, reference, gains)) /
            (2.0 * eps);
        worst = std::max(worst,
                         std::abs(fd - Z[k]) / std::max(1.0, Z.norm()));
      }
    }
  }
  result.passed = worst < 1e-4;
  result.detail = "100 random states, both potential shapings: worst "
                  "relative error " +
                  format("%.2e", worst) + " (limit 1e-4)";
  return result;
}

// ---------------------------------------------------------------------------
// 8. Integrator consistency: the gap between the discrete stepper and the
//    continuous reference shrinks at first order when the step is halved.
CriterionResult check_integrator_order(const ScenarioConfig& base) {
  CriterionResult result;
  result.id = 8;
  result.name =
      "integrator agrees with the continuous reference at first order";

  const auto gap_at = [&base](double dt) {
    ScenarioConfig config = exact(base);
    config.duration = 6.0;
    config.dt = dt;
    // Keep the truth moving so a persistent tracking gap remains.
    config.truth_twist.amplitude = {Vec3(0.05, 0.08, -0.04),
                                    Vec3(0.10, -0.05, 0.06)};
    config.truth_twist.frequency_hz = 0.2;
    config.record_stride = config.step_count();

    config.mode = StepperMode::lgvi;
    const RunRecord a = run_scenario(config).records.back();
    config.mode = StepperMode::rk4;
    const RunRecord b = run_scenario(config).records.back();

    return (a.estimate.R - b.estimate.R).norm() +
           (a.estimate.b - b.estimate.b).norm() +
           (a.error.omega - b.error.omega).norm() +
           (a.error.nu - b.error.nu).norm();
  };

  const double coarse = gap_at(0.01);
  const double fine = gap_at(0.005);
  const double ratio = coarse / fine;
  result.passed = ratio >= 1.7 && ratio <= 2.3;
  result.detail = "terminal gap " + format("%.3e", coarse) + " at dt=0.01, " +
                  format("%.3e", fine) + " at dt=0.005, ratio " +
                  format("%.3f", ratio) + " (expected within [1.7, 2.3])";
  return result;
}

// ---------------------------------------------------------------------------
// 9. Noise robustness: the steady-state error radius grows with the noise
//    width, averaged over seeds.
CriterionResult check_noise_monotonicity(const ScenarioConfig& base) {
  CriterionResult result;
  result.id = 9;
  result.name = "steady-state radius grows with noise";
  const std::vector<double> widths = {0.0, 0.001, 0.005, 0.010};
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  // 20 s: the initial transient has fully decayed before the trailing
  // window, so the radii measure the noise floor alone.
  ScenarioConfig settled = base;
  settled.duration = 20.0;
  const std::vector<NoiseSweepPoint> sweep =
      noise_sweep(settled, widths, seeds, 2.0, 0);

  bool monotone = true;
  std::string attitude_list;
  std::string position_list;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (i > 0) {
      monotone = monotone &&
                 sweep[i].mean_radius.attitude >
                     sweep[i - 1].mean_radius.attitude &&
                 sweep[i].mean_radius.position >
                     sweep[i - 1].mean_radius.position;
      attitude_list += ", ";
      position_list += ", ";
    }
    attitude_list += format("%.2e", sweep[i].mean_radius.attitude);
    position_list += format("%.2e", sweep[i].mean_radius.position);
  }
  result.passed = monotone;
  result.detail = "widths {0, 1, 5, 10} mm x 5 seeds, trailing 2 s: attitude "
                  "radii [" +
                  attitude_list + "] rad, position radii [" + position_list +
                  "] m";
  return result;
}

// ---------------------------------------------------------------------------
// 10. Basin sampling: 100 random initial attitude errors up to 3 rad all
//     converge to the noise-free thresholds by 120 s.
CriterionResult check_basin_sampling(const ScenarioConfig& base) {
  CriterionResult result;
  result.id = 10;
  result.name = "random large attitude errors all converge";
  Rng rng(9010);

  std::vector<ScenarioConfig> configs;
  configs.reserve(100);
  for (int i = 0; i < 100; ++i) {
    ScenarioConfig config = noise_free(base);
    config.duration = 120.0;
    config.record_stride = config.step_count();
    const double angle = uniform(rng, 0.03, 3.0);
    config.g_hat0.R = exp_so3(angle * random_axis(rng)) * config.g0.R;
    configs.push_back(config);
  }

  const std::vector<RunResult> runs = run_batch(configs, 0);
  int converged = 0;
  double worst_angle = 0.0;
  double worst_pos = 0.0;
  for (const RunResult& run : runs) {
    const double angle_T = run.records.back().error.principal_angle;
    const double pos_T = run.records.back().error.position_raw.norm();
    worst_angle = std::max(worst_angle, angle_T);
    worst_pos = std::max(worst_pos, pos_T);
    converged += angle_T < 1e-3 && pos_T < 1e-3;
  }
  result.passed = converged == 100;
  result.detail = std::to_string(converged) +
                  "/100 converged (worst terminal attitude " +
                  format("%.2e", worst_angle) + " rad, position " +
                  format("%.2e", worst_pos) + " m; limits 1e-3)";
  return result;
}

}  // namespace

bool AcceptanceReport::all_passed() const {
  return std::all_of(criteria.begin(), criteria.end(),
                     [](const CriterionResult& c) { return c.passed; });
}

AcceptanceReport run_acceptance(const ScenarioConfig& base,
                                std::ostream* log) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  AcceptanceReport report;
  const std::vector<CriterionResult (*)(const ScenarioConfig&)> checks = {
      check_demonstration_run,      check_noise_free_convergence,
      check_energy_decay,           check_newton_solve,
      check_structure_preservation, check_twist_recovery,
      check_potential_gradient,     check_integrator_order,
      check_noise_monotonicity,     check_basin_sampling,
  };
  for (const auto& check : checks) {
    const CriterionResult result = check(base);
    if (log != nullptr) {
      (*log) << "[" << (result.id < 10 ? " " : "") << result.id << "] "
             << (result.passed ? "PASS" : "FAIL") << "  " << result.name
             << " -- " << result.detail << "\n"
             << std::flush;
    }
    report.criteria.push_back(result);
  }

  report.wall_seconds =
      std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

AcceptanceReport run_acceptance(std::ostream* log) {
  return run_acceptance(ScenarioConfig::reference(), log);
}

std::string acceptance_report_json(const AcceptanceReport& report) {
  nlohmann::ordered_json root;
  root["all_passed"] = report.all_passed();
  root["wall_seconds"] = report.wall_seconds;
  root["criteria"] = nlohmann::ordered_json::array();
  for (const CriterionResult& criterion : report.criteria) {
    nlohmann::ordered_json entry;
    entry["id"] = criterion.id;
    entry["name"] = criterion.name;
    entry["passed"] = criterion.passed;
    entry["detail"] = criterion.detail;
    root["criteria"].push_back(entry);
  }
  return root.dump(2) + "\n";
}

}  // namespace relpose
