#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "slas/model.hpp"
#include "slas/safety.hpp"
#include "support/generators.hpp"

using namespace slas;

namespace {

// Case-study-shaped snapshot: ego in lane 1 behind a slow leader, faster
// traffic left, slower traffic right.
testgen::GenInstance case_like(int h = 40) {
  testgen::GenInstance gi;
  auto& p = gi.params;
  p.horizon = h;
  p.ts = 0.4;
  p.lane_change_steps = 3;
  p.safety.lane_change_steps = 3;
  p.safety.ts = 0.4;
  auto& snap = gi.snap;
  snap.lane_count = 3;
  snap.ego.s = 100;
  snap.ego.v = 5;
  snap.ego.lane = 1;
  snap.ego.prev_target = 1;
  snap.ego.lateral = 3.5;

  auto add = [&](int id, int lane, double s, double v) {
    ObservedVehicle veh;
    veh.id = id;
    veh.lane = lane;
    veh.s = s;
    veh.v = v;
    snap.vehicles.push_back(veh);
    SpeedModel sm;
    sm.v_bar = v;
    PredictedTrajectory traj;
    traj.lane = lane;
    traj.speeds = predict_speed(sm, h, 5, p.ts, p.v_limit);
    traj.displacements = predict_displacement(s, traj.speeds, p.ts);
    gi.preds.emplace(id, std::move(traj));
  };
  add(1, 1, 118, 5);
  add(2, 0, 95, 8);
  add(3, 0, 130, 8);
  add(4, 2, 110, 2);
  add(5, 2, 128, 2);
  add(6, 1, 160, 5);
  return gi;
}

}  // namespace

TEST_CASE("binary model shape on the case-study instance") {
  auto gi = case_like(40);
  OptimizationModel m = build_binary_model(gi.snap, gi.preds, gi.params);
  int selectors = 0, onehot = 0, adjacency_lazy = 0;
  for (const auto& v : m.vars)
    if (v.role == VarRole::LaneSelector) ++selectors;
  for (const auto& r : m.rows)
    if (r.cls == RowClass::OneHot) ++onehot;
  for (const auto& r : m.lazy_rows)
    if (r.cls == RowClass::Adjacency) ++adjacency_lazy;
  CHECK(selectors == 3 * 40);
  CHECK(onehot == 40);
  CHECK(adjacency_lazy > 0);  // lazy by default
  CHECK(m.speed_var[1] >= 0);
  CHECK(m.big_m > 2 * 50);

  SUBCASE("eager flag moves adjacency into the eager set") {
    gi.params.lazy_lane_constraints = false;
    OptimizationModel e = build_binary_model(gi.snap, gi.preds, gi.params);
    CHECK(e.lazy_rows.empty());
    int adj = 0;
    for (const auto& r : e.rows)
      if (r.cls == RowClass::Adjacency) ++adj;
    CHECK(adj == adjacency_lazy);
  }
}

TEST_CASE("integer model carries lane integers and floor auxiliaries") {
  auto gi = case_like(12);
  OptimizationModel m = build_integer_model(gi.snap, gi.preds, gi.params);
  int lane_ints = 0, floors = 0, members = 0;
  for (const auto& v : m.vars) {
    if (v.role == VarRole::LaneIndex) ++lane_ints;
    if (v.role == VarRole::FloorAux) ++floors;
    if (v.role == VarRole::Membership) ++members;
  }
  CHECK(lane_ints == 12);
  CHECK(floors == 12);
  CHECK(members > 0);
  CHECK(m.lazy_rows.empty());  // lazy treatment applies to the binary form
}

TEST_CASE("construction fails on horizon/prediction mismatch") {
  auto gi = case_like(10);
  gi.preds.at(1).displacements.resize(4);
  CHECK_THROWS_AS(build_binary_model(gi.snap, gi.preds, gi.params),
                  ModelBuildError);
}

TEST_CASE("construction never pre-judges feasibility") {
  auto gi = case_like(10);
  // Stopped leader one meter ahead: still constructible.
  gi.snap.vehicles[0].s = gi.snap.ego.s + 1;
  SpeedModel sm;
  sm.v_bar = 0;
  auto& traj = gi.preds.at(1);
  traj.speeds = predict_speed(sm, 10, 5, 0.4, 15);
  traj.displacements = predict_displacement(gi.snap.vehicles[0].s, traj.speeds, 0.4);
  CHECK_NOTHROW(build_binary_model(gi.snap, gi.preds, gi.params));
}

TEST_CASE("degenerate single-lane model keeps speed freedom only") {
  testgen::GenInstance gi;
  gi.params.horizon = 3;
  gi.snap.lane_count = 1;
  gi.snap.ego.v = 5;
  OptimizationModel m = build_binary_model(gi.snap, gi.preds, gi.params);
  int speed_vars = 0, selectors = 0;
  for (const auto& v : m.vars) {
    if (v.role == VarRole::Speed) ++speed_vars;
    if (v.role == VarRole::LaneSelector) ++selectors;
  }
  CHECK(speed_vars == 3);
  CHECK(selectors == 3);  // one per step, pinned by the one-hot rows
}

TEST_CASE("complete_assignment satisfies the model on a safe follow plan") {
  auto gi = case_like(10);
  OptimizationModel m = build_binary_model(gi.snap, gi.preds, gi.params);
  std::vector<double> speeds(10, 5.0);  // hold the leader's speed
  std::vector<int> lanes(10, 1);
  auto x = m.complete_assignment(speeds, lanes);
  CHECK(m.max_violation(x, true) <= 1e-9);
}

TEST_CASE("objective matches a hand evaluation") {
  auto gi = case_like(4);
  gi.params.gamma1 = 1;
  gi.params.gamma2 = 0.1;
  gi.params.gamma3 = 0.01;
  OptimizationModel m = build_binary_model(gi.snap, gi.preds, gi.params);
  std::vector<double> speeds = {5.5, 6.0, 6.0, 5.0};
  std::vector<int> lanes = {1, 0, 0, 0};
  auto x = m.complete_assignment(speeds, lanes);
  double expect = 0;
  double pv = 5;  // v0
  int pl = 1;     // prev target
  for (int j = 0; j < 4; ++j) {
    expect += -1.0 * speeds[j] + 0.1 * (lanes[j] - pl) * (lanes[j] - pl) +
              0.01 * (speeds[j] - pv) * (speeds[j] - pv);
    pv = speeds[j];
    pl = lanes[j];
  }
  CHECK(m.eval_objective(x) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("positive scaling of the weights scales the objective uniformly") {
  auto gi = case_like(4);
  OptimizationModel a = build_binary_model(gi.snap, gi.preds, gi.params);
  gi.params.gamma1 *= 7;
  gi.params.gamma2 *= 7;
  gi.params.gamma3 *= 7;
  OptimizationModel b = build_binary_model(gi.snap, gi.preds, gi.params);
  std::mt19937_64 rng(5);
  std::vector<double> sp(4);
  std::vector<int> ln(4);
  for (int trial = 0; trial < 50; ++trial) {
    int prev = 1;
    for (int j = 0; j < 4; ++j) {
      sp[static_cast<size_t>(j)] = testgen::uniform(rng, 0, 15);
      prev = std::clamp(prev + static_cast<int>(rng() % 3) - 1, 0, 2);
      ln[static_cast<size_t>(j)] = prev;
    }
    auto xa = a.complete_assignment(sp, ln);
    auto xb = b.complete_assignment(sp, ln);
    CHECK(b.eval_objective(xb) ==
          doctest::Approx(7 * a.eval_objective(xa)).epsilon(1e-9));
  }
}

TEST_CASE("trivial follow-the-leader plan is feasible whenever currently safe") {
  std::mt19937_64 rng(12);
  testgen::GenOptions opts;
  opts.max_lanes = 3;
  opts.max_vehicles = 3;
  opts.lane_change_steps = 3;
  opts.gamma4 = 1.0;
  int checked = 0;
  for (int trial = 0; trial < 600 && checked < 100; ++trial) {
    auto gi = testgen::gen_instance(rng, opts);
    const int h = gi.params.horizon;
    SafetyParams sp = gi.params.safety;
    sp.lane_width = gi.snap.lane_width;
    double lead_gap = 1e18, lead_v = gi.params.v_limit;
    bool rear_blocked = false;
    for (const auto& veh : gi.snap.vehicles) {
      if (veh.lane != gi.snap.ego.lane) continue;
      if (veh.s >= gi.snap.ego.s) {
        if (veh.s - gi.snap.ego.s < lead_gap) {
          lead_gap = veh.s - gi.snap.ego.s;
          lead_v = veh.v;
        }
      } else if (gi.snap.ego.s - veh.s <
                 pair_margins(gi.snap.ego.v, veh.v, 4.5, sp).rear_c +
                     gi.params.v_limit * 1.2 + 8) {
        rear_blocked = true;
      }
    }
    const double margin_needed =
        pair_margins(gi.snap.ego.v, lead_v, 4.5, sp).fwd +
        sp.gamma4 * gi.params.v_limit * sp.lane_change_steps * sp.ts + 10 +
        std::max(0.0, gi.snap.ego.v - lead_v) * h * gi.params.ts;
    if (rear_blocked || lead_gap < margin_needed) continue;
    ++checked;

    std::vector<double> speeds(static_cast<size_t>(h));
    std::vector<int> lanes(static_cast<size_t>(h), gi.snap.ego.lane);
    double prev = gi.snap.ego.v;
    for (int j = 1; j <= h; ++j) {
      double target = std::min(lead_v, gi.params.speed_cap());
      target = std::clamp(target, prev + gi.params.a_min * gi.params.ts,
                          prev + gi.params.a_max * gi.params.ts);
      target = std::clamp(target, 0.0, gi.params.speed_cap());
      speeds[static_cast<size_t>(j - 1)] = target;
      prev = target;
    }
    OptimizationModel m = build_binary_model(gi.snap, gi.preds, gi.params);
    auto x = m.complete_assignment(speeds, lanes);
    CHECK_MESSAGE(m.max_violation(x, true) <= 1e-7, "trial " << trial);
  }
  CHECK(checked >= 40);
}

TEST_CASE("lp text dump mentions objective, rows and binaries") {
  auto gi = case_like(3);
  OptimizationModel m = build_binary_model(gi.snap, gi.preds, gi.params);
  const std::string text = m.to_lp_text();
  CHECK(text.find("minimize") != std::string::npos);
  CHECK(text.find("subject to") != std::string::npos);
  CHECK(text.find("bounds") != std::string::npos);
  CHECK(text.find("L_0(1)") != std::string::npos);
}
