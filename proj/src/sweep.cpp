#include "relpose/sweep.hpp"

#include <exception>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace relpose {

std::vector<RunResult> run_batch(const std::vector<ScenarioConfig>& configs,
                                 int workers) {
  std::vector<RunResult> results(configs.size());
  if (configs.empty()) {
    return results;
  }
  if (workers == 1) {
    // Serial reference path; the pool below must reproduce it bit for bit.
    for (std::size_t i = 0; i < configs.size(); ++i) {
      results[i] = run_scenario(configs[i]);
    }
    return results;
  }

  const long long count = static_cast<long long>(configs.size());
  std::vector<std::exception_ptr> failures(configs.size());
#ifdef _OPENMP
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (long long i = 0; i < count; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    try {
      results[k] = run_scenario(configs[k]);
    } catch (...) {
      failures[k] = std::current_exception();
    }
  }
  for (const std::exception_ptr& failure : failures) {
    if (failure) {
      std::rethrow_exception(failure);
    }
  }
  return results;
}

std::vector<ScenarioConfig> noise_grid(
    const ScenarioConfig& base, const std::vector<double>& position_widths,
    const std::vector<std::uint64_t>& seeds) {
  std::vector<ScenarioConfig> grid;
  grid.reserve(position_widths.size() * seeds.size());
  for (double width : position_widths) {
    for (std::uint64_t seed : seeds) {
      ScenarioConfig config = base;
      config.noise.position_width = width;
      config.noise.seed = seed;
      grid.push_back(std::move(config));
    }
  }
  return grid;
}

std::vector<NoiseSweepPoint> noise_sweep(
    const ScenarioConfig& base, const std::vector<double>& position_widths,
    const std::vector<std::uint64_t>& seeds, double window_seconds,
    int workers) {
  if (position_widths.empty() || seeds.empty()) {
    throw std::invalid_argument(
        "noise_sweep: need at least one width and one seed");
  }
  const std::vector<RunResult> results =
      run_batch(noise_grid(base, position_widths, seeds), workers);

  std::vector<NoiseSweepPoint> points;
  points.reserve(position_widths.size());
  const double share = 1.0 / static_cast<double>(seeds.size());
  std::size_t k = 0;
  for (double width : position_widths) {
    NoiseSweepPoint point;
    point.position_width = width;
    for (std::size_t s = 0; s < seeds.size(); ++s, ++k) {
      const RunResult& result = results[k];
      const SteadyStateRadius radius =
          steady_state_radius(result.records, window_seconds);
      point.mean_radius.attitude += share * radius.attitude;
      point.mean_radius.position += share * radius.position;
      point.mean_radius.omega += share * radius.omega;
      point.mean_radius.nu += share * radius.nu;
      point.mean_terminal_attitude +=
          share * result.records.back().error.principal_angle;
      point.mean_terminal_position +=
          share * result.records.back().error.position.norm();
    }
    points.push_back(point);
  }
  return points;
}

}  // namespace relpose
