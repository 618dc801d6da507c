#include "slas/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <stdexcept>
#include <thread>

#include "slas/mobil.hpp"
#include "slas/safety.hpp"

namespace slas {

namespace {

struct TrafficState {
  int id;
  int lane;
  double s, v;
  double nominal_v;
};

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0;
  double sum = 0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0;
  const double m = mean_of(xs);
  double acc = 0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace

std::string policy_name(PolicyKind p) {
  switch (p) {
    case PolicyKind::Slas: return "slas";
    case PolicyKind::Mobil: return "mobil";
    case PolicyKind::NoChange: return "nochange";
  }
  return "?";
}

PolicyKind policy_from_name(const std::string& name) {
  if (name == "slas") return PolicyKind::Slas;
  if (name == "mobil") return PolicyKind::Mobil;
  if (name == "nochange") return PolicyKind::NoChange;
  throw std::invalid_argument("unknown policy '" + name + "'");
}

double lateral_ramp_rate(const Scenario& sc) {
  return sc.lane_width /
         (sc.planner.lane_change_steps * sc.planner.ts);
}

EpisodeLog run_episode(const Scenario& scenario, PolicyKind policy,
                       SnapshotSink* sink) {
  const auto& pp = scenario.planner;
  const double dt = scenario.sim_dt;
  const int period = static_cast<int>(std::llround(pp.ts / dt));
  const double ramp_rate = lateral_ramp_rate(scenario);

  EpisodeLog log;
  for (const auto& t : scenario.traffic) log.vehicle_ids.push_back(t.id);

  EgoState ego;
  ego.s = scenario.ego.s0;
  ego.v = scenario.ego.v0;
  ego.lane = scenario.ego.lane0;
  ego.lateral = scenario.ego.lane0 * scenario.lane_width;
  ego.prev_target = scenario.ego.lane0;
  ego.target_lane_history.assign(
      static_cast<size_t>(pp.lane_change_steps), scenario.ego.lane0);

  std::vector<TrafficState> traffic;
  for (const auto& t : scenario.traffic)
    traffic.push_back({t.id, t.lane, t.s0, t.v, t.v});

  SlasPlanner planner(pp);
  if (sink) {
    planner.tick_hook = [sink](const WorldSnapshot& snap, const PlanHint& hint) {
      sink->snapshots.push_back(snap);
      sink->hints.push_back(hint);
    };
  }
  MobilParams mobil = scenario.mobil;

  AdvisoryCommand cmd;
  cmd.target_lane = ego.lane;
  cmd.ref_speed = ego.v;
  double period_v0 = ego.v;  // ego speed at the start of the current period
  double a_cmd = 0;
  bool first_feasible_seen = false;
  bool changing = false;

  const int max_ticks = static_cast<int>(std::llround(scenario.episode_cap / dt));
  int step_k = 0;

  for (int tick = 0; tick <= max_ticks; ++tick) {
    const double t = tick * dt;

    // Planner tick.
    if (tick % period == 0) {
      std::vector<ObservedVehicle> all;
      for (const auto& ts : traffic) {
        ObservedVehicle ov;
        ov.id = ts.id;
        ov.s = ts.s;
        ov.v = ts.v;
        ov.lane = ts.lane;
        all.push_back(ov);
      }
      WorldSnapshot snap;
      snap.step = step_k;
      snap.time = t;
      snap.ego = ego;
      snap.vehicles = observe(ego, all, pp.sensing_range);
      snap.lane_count = scenario.lanes;
      snap.lane_width = scenario.lane_width;
      snap.speed_limit = scenario.speed_limit;
      snap.road_length = scenario.length;
      snap.vehicle_length = scenario.vehicle_length;

      int prev_target = cmd.target_lane;
      switch (policy) {
        case PolicyKind::Slas: {
          cmd = planner.plan_step(snap);
          const auto& d = planner.last_diag();
          ++log.solves_total;
          log.solve_wall_s.push_back(d.solve_wall_s);
          log.first_incumbent_wall_s.push_back(d.first_incumbent_wall_s);
          log.solve_statuses.push_back(static_cast<int>(d.status));
          if (d.fallback) {
            ++log.fallback_count;
            log.events.push_back({t, "fallback", "planner fallback command"});
            if (first_feasible_seen) ++log.solves_infeasible_after_feasible;
          } else {
            first_feasible_seen = true;
          }
          break;
        }
        case PolicyKind::Mobil: {
          cmd.target_lane = mobil_decision(snap, mobil);
          cmd.ref_speed = idm_speed_command(snap, cmd.target_lane,
                                            scenario.speed_limit, pp.ts, mobil,
                                            pp.a_min, pp.a_max);
          cmd.fallback = false;
          break;
        }
        case PolicyKind::NoChange: {
          cmd.target_lane = scenario.ego.lane0;
          cmd.ref_speed = idm_speed_command(snap, cmd.target_lane,
                                            scenario.speed_limit, pp.ts, mobil,
                                            pp.a_min, pp.a_max);
          cmd.fallback = false;
          break;
        }
      }
      if (std::abs(cmd.target_lane - prev_target) > 1) {
        // Command invariant: adjacent lane only. Reject and keep the lane.
        log.events.push_back({t, "rejected_command",
                              "non-adjacent target " +
                                  std::to_string(cmd.target_lane)});
        cmd.target_lane = prev_target;
      }
      if (cmd.target_lane != prev_target) {
        const double target_lat = cmd.target_lane * scenario.lane_width;
        if (changing && std::abs(ego.lateral - prev_target * scenario.lane_width) > 1e-6) {
          log.events.push_back({t, "swerve", "retarget lane " +
                                                 std::to_string(prev_target) +
                                                 " -> " +
                                                 std::to_string(cmd.target_lane)});
        } else {
          log.events.push_back({t, "lane_change_start",
                                std::to_string(prev_target) + " -> " +
                                    std::to_string(cmd.target_lane)});
        }
        changing = std::abs(ego.lateral - target_lat) > 1e-9;
      }
      ego.prev_target = cmd.target_lane;
      ego.target_lane_history.erase(ego.target_lane_history.begin());
      ego.target_lane_history.push_back(cmd.target_lane);

      period_v0 = ego.v;
      a_cmd = std::clamp((cmd.ref_speed - period_v0) / pp.ts, pp.a_min, pp.a_max);
      ++step_k;
    }

    // Record the sample before integrating (state at time t).
    TickSample sample;
    sample.t = t;
    sample.ego_s = ego.s;
    sample.ego_v = ego.v;
    sample.ego_lat = ego.lateral;
    sample.ego_lane = ego.lane;
    sample.cmd_lane = cmd.target_lane;
    sample.cmd_speed = cmd.ref_speed;
    sample.fallback = cmd.fallback ? 1 : 0;
    if (policy == PolicyKind::Slas && !log.solve_statuses.empty()) {
      const auto& d = planner.last_diag();
      sample.solve_status = static_cast<int>(d.status);
      sample.nodes = d.nodes;
      sample.lazy_cuts = d.lazy_cuts;
      sample.objective = d.objective;
    }
    double headway = pp.sensing_range;
    double closest = 1e18;
    for (const auto& ts : traffic) {
      if (ts.lane == ego.lane && ts.s > ego.s)
        headway = std::min(headway, ts.s - ego.s);
      const double dl = ts.lane * scenario.lane_width - ego.lateral;
      closest = std::min(closest, std::hypot(ts.s - ego.s, dl));
    }
    sample.headway = headway;
    sample.dist_closest = traffic.empty() ? pp.sensing_range : closest;
    for (const auto& ts : traffic) {
      sample.veh_s.push_back(ts.s);
      sample.veh_v.push_back(ts.v);
      sample.veh_lane.push_back(ts.lane);
    }
    log.samples.push_back(std::move(sample));

    // Termination checks at the sampled state.
    if (ego.s >= scenario.length) {
      log.completed = true;
      break;
    }
    bool collided = false;
    for (const auto& ts : traffic) {
      const double dl = ts.lane * scenario.lane_width - ego.lateral;
      if (std::abs(ts.s - ego.s) < scenario.vehicle_length && std::abs(dl) < 2.0) {
        log.events.push_back({t, "collision", "with vehicle " + std::to_string(ts.id)});
        collided = true;
        break;
      }
    }
    for (size_t i = 0; i < traffic.size() && !collided; ++i)
      for (size_t j = i + 1; j < traffic.size(); ++j)
        if (traffic[i].lane == traffic[j].lane &&
            std::abs(traffic[i].s - traffic[j].s) < scenario.vehicle_length) {
          log.events.push_back({t, "collision",
                                "traffic " + std::to_string(traffic[i].id) + "/" +
                                    std::to_string(traffic[j].id)});
          collided = true;
          break;
        }
    if (collided) {
      log.collision = true;
      break;
    }
    if (tick == max_ticks) break;

    // Integrate ego: piecewise-constant acceleration over the planner period,
    // linear lateral ramp toward the commanded lane center.
    const double v_next =
        std::clamp(ego.v + a_cmd * dt, 0.0, pp.speed_cap());
    ego.s = step_longitudinal(ego.s, ego.v, v_next, dt);
    ego.v = v_next;
    const double target_lat = cmd.target_lane * scenario.lane_width;
    const double max_move = ramp_rate * dt;
    const double dlat = target_lat - ego.lateral;
    if (std::abs(dlat) <= max_move) {
      if (changing && std::abs(dlat) > 0) {
        log.events.push_back({t + dt, "lane_change_finish",
                              "lane " + std::to_string(cmd.target_lane)});
        changing = false;
      }
      ego.lateral = target_lat;
    } else {
      ego.lateral += std::copysign(max_move, dlat);
      changing = true;
    }
    const int new_lane = std::clamp(
        static_cast<int>(std::floor(ego.lateral / scenario.lane_width + 0.5)),
        0, scenario.lanes - 1);
    ego.lane = new_lane;

    // Traffic: hold the nominal speed with an IDM braking clamp toward the
    // own-lane leader (the ego included); no lane changes.
    std::vector<double> new_v(traffic.size());
    for (size_t i = 0; i < traffic.size(); ++i) {
      const auto& ts = traffic[i];
      double best_gap = 1e18;
      double lead_v = 0;
      bool lead = false;
      for (size_t j = 0; j < traffic.size(); ++j) {
        if (j == i || traffic[j].lane != ts.lane || traffic[j].s <= ts.s) continue;
        const double gap = traffic[j].s - ts.s - scenario.vehicle_length;
        if (gap < best_gap) {
          best_gap = gap;
          lead_v = traffic[j].v;
          lead = true;
        }
      }
      if (ego.lane == ts.lane && ego.s > ts.s) {
        const double gap = ego.s - ts.s - scenario.vehicle_length;
        if (gap < best_gap) {
          best_gap = gap;
          lead_v = ego.v;
          lead = true;
        }
      }
      double a = idm_accel(ts.v, ts.nominal_v,
                           lead ? std::optional<double>(best_gap) : std::nullopt,
                           lead_v, scenario.mobil);
      a = std::clamp(a, -6.0, 2.0);
      new_v[i] = std::max(0.0, ts.v + a * dt);
    }
    for (size_t i = 0; i < traffic.size(); ++i) {
      traffic[i].s = step_longitudinal(traffic[i].s, traffic[i].v, new_v[i], dt);
      traffic[i].v = new_v[i];
    }
  }

  log.metrics = compute_metrics(log, scenario);
  return log;
}

Metrics compute_metrics(const EpisodeLog& log, const Scenario& scenario) {
  Metrics m;
  m.collision = log.collision;
  m.completed = log.completed;
  if (log.samples.empty()) return m;
  const double dt = scenario.sim_dt;

  std::vector<double> headways, dists;
  for (const auto& s : log.samples) {
    headways.push_back(s.headway);
    dists.push_back(s.dist_closest);
  }
  m.mean_headway = mean_of(headways);
  m.min_dist_closest = *std::min_element(dists.begin(), dists.end());
  m.mean_dist_closest = mean_of(dists);
  m.travel_time = log.completed ? log.samples.back().t : -1;

  const size_t n = log.samples.size();
  if (n >= 3) {
    std::vector<double> a_long(n - 1), a_lat(n - 2), j_long, j_lat;
    for (size_t i = 0; i + 1 < n; ++i)
      a_long[i] = (log.samples[i + 1].ego_v - log.samples[i].ego_v) / dt;
    for (size_t i = 1; i + 1 < n; ++i)
      a_lat[i - 1] = (log.samples[i + 1].ego_lat - 2 * log.samples[i].ego_lat +
                      log.samples[i - 1].ego_lat) /
                     (dt * dt);
    for (size_t i = 0; i + 1 < a_long.size(); ++i)
      j_long.push_back((a_long[i + 1] - a_long[i]) / dt);
    for (size_t i = 0; i + 1 < a_lat.size(); ++i)
      j_lat.push_back((a_lat[i + 1] - a_lat[i]) / dt);

    auto abs_stats = [](const std::vector<double>& xs, double& mean, double& sd) {
      std::vector<double> a(xs.size());
      for (size_t i = 0; i < xs.size(); ++i) a[i] = std::abs(xs[i]);
      mean = mean_of(a);
      sd = std_of(a);
    };
    abs_stats(a_long, m.long_accel_abs_mean, m.long_accel_abs_std);
    abs_stats(j_long, m.long_jerk_abs_mean, m.long_jerk_abs_std);
    abs_stats(a_lat, m.lat_accel_abs_mean, m.lat_accel_abs_std);
    abs_stats(j_lat, m.lat_jerk_abs_mean, m.lat_jerk_abs_std);

    std::vector<double> brake, throttle, brake_jerk, throttle_jerk;
    for (double a : a_long) (a < 0 ? brake : throttle).push_back(a);
    for (double j : j_long) (j < 0 ? brake_jerk : throttle_jerk).push_back(j);
    m.brake_mean = mean_of(brake);
    m.throttle_mean = mean_of(throttle);
    m.brake_jerk_mean = mean_of(brake_jerk);
    m.throttle_jerk_mean = mean_of(throttle_jerk);
  }
  return m;
}

const std::vector<std::string> kMonteCarloColumns = {
    "comp_time", "brake",     "brake_jerk", "throttle",
    "throttle_jerk", "lat_accel", "lat_jerk"};

MonteCarloResult monte_carlo(const Scenario& base, int n,
                             const std::vector<PolicyKind>& policies,
                             double jitter_range) {
  MonteCarloResult result;

  // Per-lane nominal speeds of the base scenario, permuted per run.
  std::vector<double> lane_speed(static_cast<size_t>(base.lanes), base.speed_limit);
  for (const auto& t : base.traffic) lane_speed[static_cast<size_t>(t.lane)] = t.v;

  std::vector<Scenario> worlds;
  for (int run = 0; run < n; ++run) {
    const std::uint64_t seed = base.seed + static_cast<std::uint64_t>(run);
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      return lo + u * (hi - lo);
    };
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
      Scenario sc = base;
      sc.seed = seed;
      std::vector<double> speeds = lane_speed;
      for (size_t i = speeds.size(); i > 1; --i)
        std::swap(speeds[i - 1], speeds[static_cast<size_t>(rng() % i)]);
      for (auto& t : sc.traffic) {
        t.s0 += uniform(-jitter_range, jitter_range);
        t.v = speeds[static_cast<size_t>(t.lane)];
      }
      try {
        sc.validate();
        worlds.push_back(sc);
        result.run_seeds.push_back(seed);
        ok = true;
      } catch (const ScenarioError&) {
      }
    }
    if (!ok) ++result.skipped_runs;
  }

  // Independent episodes run concurrently; aggregation is ordered by run.
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  for (PolicyKind policy : policies) {
    std::vector<EpisodeLog> logs(worlds.size());
    for (size_t start = 0; start < worlds.size(); start += workers) {
      std::vector<std::future<EpisodeLog>> futs;
      const size_t end = std::min(worlds.size(), start + workers);
      for (size_t i = start; i < end; ++i)
        futs.push_back(std::async(std::launch::async, [&worlds, i, policy] {
          return run_episode(worlds[i], policy);
        }));
      for (size_t i = start; i < end; ++i) logs[i] = futs[i - start].get();
    }

    MonteCarloRow row;
    row.policy = policy;
    row.runs = static_cast<int>(worlds.size());
    std::vector<std::vector<double>> cols(kMonteCarloColumns.size());
    std::vector<double> headways, ljerk, latjerk;
    for (const auto& log : logs) {
      row.collisions += log.collision ? 1 : 0;
      row.fallbacks += log.fallback_count;
      row.infeasible_after_feasible += log.solves_infeasible_after_feasible;
      if (log.collision) continue;  // excluded from comparisons
      if (log.completed) {
        ++row.completed;
        cols[0].push_back(log.metrics.travel_time);
      }
      cols[1].push_back(log.metrics.brake_mean);
      cols[2].push_back(log.metrics.brake_jerk_mean);
      cols[3].push_back(log.metrics.throttle_mean);
      cols[4].push_back(log.metrics.throttle_jerk_mean);
      cols[5].push_back(log.metrics.lat_accel_abs_mean);
      cols[6].push_back(log.metrics.lat_jerk_abs_mean);
      headways.push_back(log.metrics.mean_headway);
      ljerk.push_back(log.metrics.long_jerk_abs_mean);
      latjerk.push_back(log.metrics.lat_jerk_abs_mean);
    }
    for (size_t c = 0; c < cols.size(); ++c)
      row.columns.push_back({mean_of(cols[c]), std_of(cols[c])});
    row.mean_headway = {mean_of(headways), std_of(headways)};
    row.long_jerk_abs = {mean_of(ljerk), std_of(ljerk)};
    row.lat_jerk_abs = {mean_of(latjerk), std_of(latjerk)};
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace slas
