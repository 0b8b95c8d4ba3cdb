#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relpose/acceptance.hpp"
#include "relpose/config_io.hpp"
#include "relpose/errors.hpp"
#include "relpose/run_io.hpp"
#include "relpose/scenario.hpp"
#include "relpose/svg_plot.hpp"
#include "relpose/sweep.hpp"

namespace {

using namespace relpose;

std::string default_out_dir() {
  const char* env = std::getenv("RELPOSE_OUT_DIR");
  return env != nullptr && env[0] != '\0' ? env : "out";
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError(dir + ": cannot create output directory (" + ec.message() +
                  ")");
  }
}

std::string format(const char* spec, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), spec, value);
  return buffer;
}

// Flag values shared by the scenario-running subcommands.
struct RunFlags {
  std::string config_path;
  std::string out_dir = default_out_dir();
  std::uint64_t seed = 0;
  std::string mode;  // empty = use the config's stepper
  long long steps = 0;
  double dt = 0.0;
};

void add_override_flags(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("--out", flags.out_dir,
                  "Output directory (default $RELPOSE_OUT_DIR or ./out)");
  cmd->add_option("--seed", flags.seed, "Override the noise seed")
      ->group("Overrides");
  cmd->add_option("--mode", flags.mode, "Stepper: lgvi | rk4 | both")
      ->check(CLI::IsMember({"lgvi", "rk4", "both"}))
      ->group("Overrides");
  cmd->add_option("--steps", flags.steps,
                  "Override the step count (duration becomes steps * dt)")
      ->check(CLI::PositiveNumber)
      ->group("Overrides");
  cmd->add_option("--dt", flags.dt, "Override the step size in seconds")
      ->check(CLI::PositiveNumber)
      ->group("Overrides");
}

ScenarioConfig apply_overrides(ScenarioConfig config, const RunFlags& flags,
                               const CLI::App* cmd) {
  if (cmd->count("--dt") > 0) {
    config.dt = flags.dt;
  }
  if (cmd->count("--steps") > 0) {
    config.duration = static_cast<double>(flags.steps) * config.dt;
  }
  if (cmd->count("--seed") > 0) {
    config.noise.seed = flags.seed;
  }
  if (flags.mode == "lgvi") {
    config.mode = StepperMode::lgvi;
  } else if (flags.mode == "rk4") {
    config.mode = StepperMode::rk4;
  }
  config.validate();
  return config;
}

const char* mode_name(StepperMode mode) {
  return mode == StepperMode::lgvi ? "lgvi" : "rk4";
}

void print_run_summary(const ScenarioConfig& config, const RunResult& result) {
  const RunRecord& last = result.records.back();
  std::cout << mode_name(config.mode) << ": " << config.step_count()
            << " steps of " << config.dt << " s; terminal attitude error "
            << format("%.3e", last.error.principal_angle)
            << " rad, position error "
            << format("%.3e", last.error.position_raw.norm())
            << " m; max Newton iterations " << result.max_newton_iterations
            << ", worst residual "
            << format("%.2e", result.worst_newton_residual)
            << ", orthonormality drift "
            << format("%.2e", result.max_orthonormality_drift) << "; "
            << format("%.3f", result.wall_seconds) << " s wall\n";
}

// Runs one configured scenario and writes its artifacts into `dir`.
void run_into(const ScenarioConfig& config, const std::string& dir) {
  const RunResult result = run_scenario(config);
  ensure_dir(dir);
  save_config(config, dir + "/config.json");
  write_run_csv(result, dir + "/run.csv");
  const std::vector<std::string> plots = emit_plots(result, dir);
  print_run_summary(config, result);
  std::cout << "wrote " << dir << "/config.json, " << dir << "/run.csv";
  for (const std::string& plot : plots) {
    std::cout << ", " << plot;
  }
  std::cout << "\n";
}

int do_run(const ScenarioConfig& base, const RunFlags& flags) {
  if (flags.mode == "both") {
    for (StepperMode mode : {StepperMode::lgvi, StepperMode::rk4}) {
      ScenarioConfig config = base;
      config.mode = mode;
      run_into(config, flags.out_dir + "/" + mode_name(mode));
    }
  } else {
    run_into(base, flags.out_dir);
  }
  return 0;
}

int do_sweep(const ScenarioConfig& base, const RunFlags& flags,
             const std::vector<double>& widths,
             const std::vector<std::uint64_t>& seeds, double window,
             int workers) {
  if (flags.mode == "both") {
    throw std::invalid_argument(
        "sweep runs one stepper per grid; pass --mode lgvi or --mode rk4");
  }
  const std::vector<ScenarioConfig> grid = noise_grid(base, widths, seeds);
  const std::vector<RunResult> results = run_batch(grid, workers);
  ensure_dir(flags.out_dir);

  std::string summary = "noise_width_m,seed,steady_attitude_rad,"
                        "steady_position_m,steady_omega_rad_s,steady_nu_m_s,"
                        "terminal_attitude_rad,terminal_position_m,csv\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "run_%03zu.csv", i);
    write_run_csv(results[i], flags.out_dir + "/" + name);

    const SteadyStateRadius radius =
        steady_state_radius(results[i].records, window);
    const RunRecord& last = results[i].records.back();
    summary += format("%.17g", grid[i].noise.position_width) + "," +
               std::to_string(grid[i].noise.seed) + "," +
               format("%.17g", radius.attitude) + "," +
               format("%.17g", radius.position) + "," +
               format("%.17g", radius.omega) + "," +
               format("%.17g", radius.nu) + "," +
               format("%.17g", last.error.principal_angle) + "," +
               format("%.17g", last.error.position_raw.norm()) + "," + name +
               "\n";
  }
  const std::string summary_path = flags.out_dir + "/sweep_summary.csv";
  std::ofstream file(summary_path);
  if (!file || !(file << summary)) {
    throw IoError(summary_path + ": cannot write");
  }
  std::cout << grid.size() << " runs (" << widths.size() << " widths x "
            << seeds.size() << " seeds) -> " << flags.out_dir
            << "; summary in " << summary_path << "\n";
  return 0;
}

int do_check(const std::string& config_path, const std::string& out_dir) {
  AcceptanceReport report;
  if (config_path.empty()) {
    report = run_acceptance(&std::cout);
  } else {
    report = run_acceptance(load_config(config_path), &std::cout);
  }
  ensure_dir(out_dir);
  const std::string report_path = out_dir + "/acceptance_report.json";
  std::ofstream file(report_path);
  if (!file || !(file << acceptance_report_json(report))) {
    throw IoError(report_path + ": cannot write");
  }

  int passed = 0;
  for (const CriterionResult& criterion : report.criteria) {
    passed += criterion.passed;
  }
  std::cout << passed << "/" << report.criteria.size()
            << " criteria passed in " << format("%.1f", report.wall_seconds)
            << " s; report in " << report_path << "\n";
  return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative pose and velocity estimator: simulate, sweep, and "
               "verify"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand(
      "run", "Simulate one configured scenario; write CSV log and SVG plots");
  run_cmd->add_option("--config", run_flags.config_path,
                      "Scenario config (JSON; // comments allowed)")
      ->required();
  add_override_flags(run_cmd, run_flags);

  RunFlags preset_flags;
  CLI::App* preset_cmd = app.add_subcommand(
      "paper-scenario",
      "Run the built-in two-vehicle demonstration preset (no config needed)");
  add_override_flags(preset_cmd, preset_flags);

  RunFlags sweep_flags;
  std::vector<double> sweep_widths = {0.0, 0.001, 0.005, 0.010};
  std::vector<std::uint64_t> sweep_seeds = {1, 2, 3, 4, 5};
  double sweep_window = 2.0;
  int sweep_workers = 0;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Run a noise-width x seed grid in parallel; one CSV per run "
               "plus a steady-state summary");
  sweep_cmd->add_option("--config", sweep_flags.config_path,
                        "Base scenario config (default: built-in preset)");
  sweep_cmd->add_option("--widths", sweep_widths,
                        "Noise support widths in meters")
      ->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep_seeds, "Noise seeds")->delimiter(',');
  sweep_cmd->add_option("--window", sweep_window,
                        "Trailing window for steady-state radii, seconds")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--workers", sweep_workers,
                        "Worker threads (0 = runtime default)");
  add_override_flags(sweep_cmd, sweep_flags);

  std::string check_config;
  std::string check_out = default_out_dir();
  CLI::App* check_cmd = app.add_subcommand(
      "check", "Run the acceptance suite; exit 0 only if every criterion "
               "passes");
  check_cmd->add_option("--config", check_config,
                        "Base scenario for the suite (default: built-in "
                        "preset)");
  check_cmd->add_option("--out", check_out,
                        "Directory for acceptance_report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run_cmd->parsed()) {
      const ScenarioConfig config = apply_overrides(
          load_config(run_flags.config_path), run_flags, run_cmd);
      return do_run(config, run_flags);
    }
    if (preset_cmd->parsed()) {
      const ScenarioConfig config = apply_overrides(
          ScenarioConfig::reference(), preset_flags, preset_cmd);
      return do_run(config, preset_flags);
    }
    if (sweep_cmd->parsed()) {
      const ScenarioConfig base = apply_overrides(
          sweep_flags.config_path.empty()
              ? ScenarioConfig::reference()
              : load_config(sweep_flags.config_path),
          sweep_flags, sweep_cmd);
      return do_sweep(base, sweep_flags, sweep_widths, sweep_seeds,
                      sweep_window, sweep_workers);
    }
    return do_check(check_config, check_out);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& err) {
    std::cerr << "invalid request: " << err.what() << "\n";
    return 1;
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return 2;
  } catch (const IoError& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return 3;
  }
}
