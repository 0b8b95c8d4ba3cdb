#pragma once

#include <cstdint>
#include <vector>

#include "relpose/scenario.hpp"

namespace relpose {

/// Runs every config and returns the results in input order.  workers == 1
/// executes serially on the calling thread (the reference path); any other
/// value fans the runs out across an OpenMP pool, sized by workers when
/// positive or by the runtime default when zero or negative.  Scheduling
/// never changes the output: each run is independent and results are merged
/// by index, so any worker count is bit-identical to the serial path.  When
/// runs fail, the earliest failure by input index is rethrown (the parallel
/// pool still finishes the remaining runs first).
std::vector<RunResult> run_batch(const std::vector<ScenarioConfig>& configs,
                                 int workers);

/// Cross product of position-noise widths and seeds applied to a base
/// config, width-major order.  Only noise.position_width and noise.seed vary.
std::vector<ScenarioConfig> noise_grid(
    const ScenarioConfig& base, const std::vector<double>& position_widths,
    const std::vector<std::uint64_t>& seeds);

/// Aggregate behaviour of one noise width, averaged over the seed axis.
struct NoiseSweepPoint {
  double position_width = 0.0;
  SteadyStateRadius mean_radius;  // trailing-window radii, seed-averaged
  double mean_terminal_attitude = 0.0;  // rad
  double mean_terminal_position = 0.0;  // m
};

/// Runs the noise grid and averages the steady-state radii per width.
/// Points come back in the order of position_widths.
std::vector<NoiseSweepPoint> noise_sweep(
    const ScenarioConfig& base, const std::vector<double>& position_widths,
    const std::vector<std::uint64_t>& seeds, double window_seconds,
    int workers);

}  // namespace relpose
