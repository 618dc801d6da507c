#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slas/planner.hpp"
#include "slas/scenario.hpp"
#include "slas/vehicle.hpp"

namespace slas {

enum class PolicyKind { Slas, Mobil, NoChange };

std::string policy_name(PolicyKind p);
PolicyKind policy_from_name(const std::string& name);

struct TickSample {
  double t = 0;
  double ego_s = 0, ego_v = 0, ego_lat = 0;
  int ego_lane = 0;
  int cmd_lane = 0;
  double cmd_speed = 0;
  double headway = 0;
  double dist_closest = 0;
  int solve_status = -1;  // -1 between planner ticks / non-SLAS policies
  int nodes = 0;
  int lazy_cuts = 0;
  double objective = 0;
  int fallback = 0;
  std::vector<double> veh_s, veh_v;
  std::vector<int> veh_lane;
};

struct Event {
  double t = 0;
  std::string kind;
  std::string detail;
};

struct Metrics {
  bool completed = false;
  bool collision = false;
  double travel_time = 0;  // valid when completed
  double mean_headway = 0;
  double min_dist_closest = 0;
  double mean_dist_closest = 0;
  // Comfort statistics from finite differences of the sampled trajectory.
  double long_accel_abs_mean = 0, long_accel_abs_std = 0;
  double long_jerk_abs_mean = 0, long_jerk_abs_std = 0;
  double lat_accel_abs_mean = 0, lat_accel_abs_std = 0;
  double lat_jerk_abs_mean = 0, lat_jerk_abs_std = 0;
  // Table columns mirroring the actuator-channel layout: signed means over
  // the braking/accelerating subsets.
  double brake_mean = 0, brake_jerk_mean = 0;
  double throttle_mean = 0, throttle_jerk_mean = 0;
};

struct EpisodeLog {
  std::vector<int> vehicle_ids;  // column order of veh_* vectors
  std::vector<TickSample> samples;
  std::vector<Event> events;
  Metrics metrics;
  bool collision = false;
  bool completed = false;
  int fallback_count = 0;
  int solves_total = 0;
  int solves_infeasible_after_feasible = 0;
  // Wall-clock solver latencies per planner tick (reporting only, never in CSV).
  std::vector<double> solve_wall_s;
  std::vector<double> first_incumbent_wall_s;
  std::vector<int> solve_statuses;
};

/// Captures the planner inputs of every SLAS tick for offline benchmarks.
struct SnapshotSink {
  std::vector<WorldSnapshot> snapshots;
  std::vector<PlanHint> hints;
};

EpisodeLog run_episode(const Scenario& scenario, PolicyKind policy,
                       SnapshotSink* sink = nullptr);

Metrics compute_metrics(const EpisodeLog& log, const Scenario& scenario);

/// Lateral trajectory of one lane change: linear ramp between lane centers
/// over N*T_s seconds. Exposed for the executor tests.
double lateral_ramp_rate(const Scenario& sc);

struct MonteCarloCell {
  double mean = 0, stddev = 0;
};

struct MonteCarloRow {
  PolicyKind policy;
  int runs = 0;
  int completed = 0;
  int collisions = 0;
  int fallbacks = 0;
  int infeasible_after_feasible = 0;
  // Columns: comp_time, brake, brake_jerk, throttle, throttle_jerk,
  // lat_accel, lat_jerk (means and standard deviations across runs).
  std::vector<MonteCarloCell> columns;
  MonteCarloCell mean_headway;
  MonteCarloCell long_jerk_abs;  // mean |long jerk| across runs
  MonteCarloCell lat_jerk_abs;
};

extern const std::vector<std::string> kMonteCarloColumns;

struct MonteCarloResult {
  std::vector<MonteCarloRow> rows;
  int skipped_runs = 0;
  std::vector<std::uint64_t> run_seeds;
};

/// Seeded Monte Carlo campaign: per run, traffic positions jitter uniformly
/// within +-8 m and the per-lane nominal speeds are permuted; every policy
/// replays the identical world. Invalid draws are resampled a bounded number
/// of times, then the run is skipped with a warning event.
MonteCarloResult monte_carlo(const Scenario& base, int n,
                             const std::vector<PolicyKind>& policies,
                             double jitter_range = 8.0);

}  // namespace slas
