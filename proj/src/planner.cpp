#include "slas/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slas/predictor.hpp"

namespace slas {

AdvisoryCommand extract_command(const SolveResult& result,
                                const OptimizationModel& model) {
  if (!result.incumbent ||
      (result.status != SolveStatus::Optimal &&
       result.status != SolveStatus::FeasibleTimeout))
    throw std::runtime_error(
        "planner: no incumbent; apply the keep-lane fallback");
  const auto& x = *result.incumbent;
  AdvisoryCommand cmd;
  cmd.plan_speeds.resize(static_cast<size_t>(model.horizon));
  cmd.plan_lanes.resize(static_cast<size_t>(model.horizon));
  for (int j = 1; j <= model.horizon; ++j) {
    cmd.plan_speeds[static_cast<size_t>(j - 1)] =
        x[static_cast<size_t>(model.speed_var[static_cast<size_t>(j)])];
    cmd.plan_lanes[static_cast<size_t>(j - 1)] = model.lane_at(x, j);
  }
  cmd.target_lane = cmd.plan_lanes[0];
  cmd.ref_speed = std::clamp(cmd.plan_speeds[0], 0.0, model.speed_cap);
  return cmd;
}

SlasPlanner::SlasPlanner(const PlannerParams& params) : params_(params) {}

AdvisoryCommand SlasPlanner::fallback_command(const WorldSnapshot& snapshot) {
  const auto& ego = snapshot.ego;
  double v_ref = ego.v;
  double best_gap = 1e18;
  for (const auto& veh : snapshot.vehicles) {
    if (veh.lane != ego.lane || veh.s <= ego.s) continue;
    if (veh.s - ego.s < best_gap) {
      best_gap = veh.s - ego.s;
      v_ref = veh.v;
    }
  }
  const double lo = std::max(0.0, ego.v + params_.a_min * params_.ts);
  const double hi =
      std::min(params_.speed_cap(), ego.v + params_.a_max * params_.ts);
  AdvisoryCommand cmd;
  cmd.target_lane = ego.prev_target;
  cmd.ref_speed = std::clamp(v_ref, lo, hi);
  cmd.plan_speeds.assign(static_cast<size_t>(params_.horizon), cmd.ref_speed);
  cmd.plan_lanes.assign(static_cast<size_t>(params_.horizon), cmd.target_lane);
  cmd.fallback = true;
  return cmd;
}

AdvisoryCommand SlasPlanner::plan_step(const WorldSnapshot& snapshot) {
  diag_ = PlannerDiag{};

  // Maintain per-vehicle speed observation rings at the planner rate.
  WorldSnapshot merged = snapshot;
  for (auto& veh : merged.vehicles) {
    auto& ring = history_[veh.id];
    ring.push_back({snapshot.time, veh.v});
    const size_t window = static_cast<size_t>(params_.predictor.history_window);
    if (ring.size() > window)
      ring.erase(ring.begin(), ring.begin() + static_cast<long>(ring.size() - window));
    veh.speed_history = ring;
  }

  auto preds = predict_all(merged, params_.horizon, params_.predictor,
                           params_.ts, params_.v_limit);
  for (const auto& [id, traj] : preds)
    if (traj.fallback) ++diag_.prediction_fallbacks;

  OptimizationModel model = build_model(merged, preds, params_);

  PlanHint hint = warm_start_from(prev_plan_);
  diag_.hint_offered = !hint.empty();
  if (tick_hook) tick_hook(merged, hint);

  SolverOptions opts;
  MbqpSolver solver(model, opts);
  SolveResult res = solver.solve(hint.empty() ? nullptr : &hint,
                                 params_.time_limit);

  diag_.status = res.status;
  diag_.nodes = res.nodes_explored;
  diag_.lazy_cuts = res.lazy_cuts_added;
  diag_.total_work = res.total_work;
  diag_.solve_wall_s = res.total_time;
  diag_.first_incumbent_wall_s = res.first_incumbent_time;

  AdvisoryCommand cmd;
  if (res.incumbent && (res.status == SolveStatus::Optimal ||
                        res.status == SolveStatus::FeasibleTimeout)) {
    diag_.objective = res.objective;
    cmd = extract_command(res, model);
    prev_plan_.speeds = cmd.plan_speeds;
    prev_plan_.lanes = cmd.plan_lanes;
  } else {
    cmd = fallback_command(merged);
    diag_.fallback = true;
    prev_plan_ = PlanHint{};
  }
  return cmd;
}

}  // namespace slas
