#include "slas/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "slas/safety.hpp"

namespace slas {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ScenarioError("scenario: " + path + ": " + msg);
}

const json& require(const json& obj, const std::string& key,
                    const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required key");
  return *it;
}

double num(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

int integer(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

double opt_num(const json& obj, const std::string& key, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : it->get<double>();
}

int opt_int(const json& obj, const std::string& key, int fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : it->get<int>();
}

bool opt_bool(const json& obj, const std::string& key, bool fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : it->get<bool>();
}

// Applies a dotted "a.b.c=value" assignment to the document. Values parse as
// JSON when possible, otherwise as strings.
void apply_override(json& doc, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ScenarioError("override '" + assignment + "' is not key=value");
  std::string key = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ScenarioError("override '" + assignment + "' has an empty key");
  for (size_t i = 0; i + 1 < parts.size(); ++i) node = &((*node)[parts[i]]);
  (*node)[parts.back()] = parsed;
}

PlannerParams parse_planner(const json& p, double speed_limit) {
  PlannerParams out;
  out.v_limit = speed_limit;
  out.v_max_vehicle = speed_limit;
  out.horizon = opt_int(p, "horizon_steps", out.horizon);
  out.ts = opt_num(p, "ts_s", out.ts);
  out.lane_change_steps = opt_int(p, "lane_change_steps", out.lane_change_steps);
  out.gamma1 = opt_num(p, "gamma1", out.gamma1);
  out.gamma2 = opt_num(p, "gamma2", out.gamma2);
  out.gamma3 = opt_num(p, "gamma3", out.gamma3);
  out.a_min = opt_num(p, "a_min_mps2", out.a_min);
  out.a_max = opt_num(p, "a_max_mps2", out.a_max);
  out.v_max_vehicle = opt_num(p, "v_max_mps", out.v_max_vehicle);
  out.big_m = opt_num(p, "big_m", out.big_m);
  out.epsilon = opt_num(p, "epsilon", out.epsilon);
  out.time_limit = opt_num(p, "time_limit_s", out.time_limit);
  out.lazy_lane_constraints =
      opt_bool(p, "lazy_lane_constraints", out.lazy_lane_constraints);
  out.sensing_range = opt_num(p, "sensing_range_m", out.sensing_range);
  if (p.contains("formulation")) {
    const std::string f = p.at("formulation").get<std::string>();
    if (f == "binary") out.formulation = Formulation::Binary;
    else if (f == "integer") out.formulation = Formulation::Integer;
    else fail("planner.formulation", "expected 'binary' or 'integer'");
  }
  if (p.contains("safety")) {
    const json& s = p.at("safety");
    out.safety.d_min = opt_num(s, "d_min_m", out.safety.d_min);
    out.safety.t_react = opt_num(s, "t_react_s", out.safety.t_react);
    out.safety.a_brake_ego = opt_num(s, "a_brake_ego_mps2", out.safety.a_brake_ego);
    out.safety.a_brake_other =
        opt_num(s, "a_brake_other_mps2", out.safety.a_brake_other);
    out.safety.gamma4 = opt_num(s, "gamma4", out.safety.gamma4);
  }
  if (p.contains("predictor")) {
    const json& q = p.at("predictor");
    out.predictor.accel_horizon =
        opt_int(q, "accel_horizon_steps", out.predictor.accel_horizon);
    out.predictor.history_window =
        opt_int(q, "history_window", out.predictor.history_window);
  }
  return out;
}

MobilParams parse_mobil(const json& m) {
  MobilParams out;
  out.politeness = opt_num(m, "politeness", out.politeness);
  out.a_threshold = opt_num(m, "a_threshold_mps2", out.a_threshold);
  out.b_safe = opt_num(m, "b_safe_mps2", out.b_safe);
  out.idm_time_headway = opt_num(m, "idm_time_headway_s", out.idm_time_headway);
  out.idm_min_gap = opt_num(m, "idm_min_gap_m", out.idm_min_gap);
  out.idm_accel = opt_num(m, "idm_accel_mps2", out.idm_accel);
  out.idm_decel = opt_num(m, "idm_decel_mps2", out.idm_decel);
  return out;
}

}  // namespace

void Scenario::validate() const {
  if (lanes < 1) throw ScenarioError("scenario: road.lanes: must be >= 1");
  if (lane_width <= 0)
    throw ScenarioError("scenario: road.lane_width_m: must be > 0");
  if (speed_limit <= 0)
    throw ScenarioError("scenario: road.speed_limit_mps: must be > 0");
  if (length <= 0) throw ScenarioError("scenario: road.length_m: must be > 0");
  if (sim_dt <= 0) throw ScenarioError("scenario: sim.dt_s: must be > 0");
  if (ego.lane0 < 0 || ego.lane0 >= lanes)
    throw ScenarioError("scenario: ego.lane0: outside the lane set");
  if (ego.v0 < 0 || ego.v0 > speed_limit)
    throw ScenarioError("scenario: ego.v0_mps: outside [0, speed_limit]");

  const double ratio = planner.ts / sim_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9)
    throw ScenarioError("scenario: sim.dt_s must divide planner.ts_s exactly");

  if (planner.horizon < 1 || planner.lane_change_steps < 1 ||
      planner.ts <= 0 || planner.gamma1 < 0 || planner.gamma2 < 0 ||
      planner.gamma3 < 0)
    throw ScenarioError("scenario: planner: invalid horizon/weights");
  if (!(planner.a_min < 0 && 0 < planner.a_max))
    throw ScenarioError("scenario: planner: requires a_min < 0 < a_max");
  if (!(planner.epsilon > 0 && planner.epsilon < 1))
    throw ScenarioError("scenario: planner.epsilon: must be in (0, 1)");

  std::set<int> ids;
  for (const auto& t : traffic) {
    if (t.id <= 0)
      throw ScenarioError("scenario: traffic: ids must be positive");
    if (!ids.insert(t.id).second)
      throw ScenarioError("scenario: traffic: duplicate id " +
                          std::to_string(t.id));
    if (t.lane < 0 || t.lane >= lanes)
      throw ScenarioError("scenario: traffic id " + std::to_string(t.id) +
                          ": lane outside the lane set");
    if (t.v < 0)
      throw ScenarioError("scenario: traffic id " + std::to_string(t.id) +
                          ": negative speed");
  }
  // Same-lane spacing: no pair closer than the minimum safe gap plus the
  // vehicle length (center-to-center).
  SafetyParams sp = planner.safety;
  sp.lane_change_steps = planner.lane_change_steps;
  sp.ts = planner.ts;
  sp.lane_width = lane_width;
  auto check_pair = [&](int id_a, double sa, double va, int id_b, double sb,
                        double vb) {
    const double rear_v = sa < sb ? va : vb;
    const double front_v = sa < sb ? vb : va;
    const double need =
        min_safe_distance(rear_v, front_v, sp, GapDirection::Forward) +
        vehicle_length;
    if (std::abs(sa - sb) < need)
      throw ScenarioError("scenario: vehicles " + std::to_string(id_a) +
                          " and " + std::to_string(id_b) + " start " +
                          std::to_string(std::abs(sa - sb)) +
                          " m apart, below the minimum safe distance");
  };
  for (size_t i = 0; i < traffic.size(); ++i) {
    for (size_t j = i + 1; j < traffic.size(); ++j) {
      if (traffic[i].lane != traffic[j].lane) continue;
      check_pair(traffic[i].id, traffic[i].s0, traffic[i].v, traffic[j].id,
                 traffic[j].s0, traffic[j].v);
    }
    if (traffic[i].lane == ego.lane0)
      check_pair(traffic[i].id, traffic[i].s0, traffic[i].v, 0, ego.s0, ego.v0);
  }
}

Scenario load_scenario(const std::string& text,
                       const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario: invalid JSON: ") + e.what());
  }
  for (const auto& o : overrides) apply_override(doc, o);

  Scenario sc;
  const json& road = require(doc, "road", "root");
  sc.lanes = integer(road, "lanes", "road");
  sc.lane_width = num(road, "lane_width_m", "road");
  sc.speed_limit = num(road, "speed_limit_mps", "road");
  sc.length = num(road, "length_m", "road");

  const json& ego = require(doc, "ego", "root");
  sc.ego.s0 = num(ego, "s0_m", "ego");
  sc.ego.v0 = num(ego, "v0_mps", "ego");
  sc.ego.lane0 = integer(ego, "lane0", "ego");

  const json& traffic = require(doc, "traffic", "root");
  if (!traffic.is_array()) fail("traffic", "expected an array");
  for (size_t i = 0; i < traffic.size(); ++i) {
    const std::string path = "traffic[" + std::to_string(i) + "]";
    const json& t = traffic[i];
    TrafficSeed seed;
    seed.id = integer(t, "id", path);
    seed.lane = integer(t, "lane", path);
    seed.s0 = num(t, "s0_m", path);
    seed.v = num(t, "v_mps", path);
    sc.traffic.push_back(seed);
  }

  const json& sim = require(doc, "sim", "root");
  sc.sim_dt = num(sim, "dt_s", "sim");
  sc.seed = sim.contains("seed") ? sim.at("seed").get<std::uint64_t>() : 0;

  const json& planner = require(doc, "planner", "root");
  sc.planner = parse_planner(planner, sc.speed_limit);
  sc.planner.safety.lane_change_steps = sc.planner.lane_change_steps;
  sc.planner.safety.ts = sc.planner.ts;
  sc.planner.safety.lane_width = sc.lane_width;

  if (doc.contains("mobil")) sc.mobil = parse_mobil(doc.at("mobil"));
  if (doc.contains("sim") && sim.contains("vehicle_length_m"))
    sc.vehicle_length = sim.at("vehicle_length_m").get<double>();
  if (sim.contains("episode_cap_s"))
    sc.episode_cap = sim.at("episode_cap_s").get<double>();

  sc.validate();
  return sc;
}

Scenario load_scenario_file(const std::string& path,
                            const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("scenario: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str(), overrides);
}

std::string scenario_to_json(const Scenario& sc) {
  json doc;
  doc["road"] = {{"lanes", sc.lanes},
                 {"lane_width_m", sc.lane_width},
                 {"speed_limit_mps", sc.speed_limit},
                 {"length_m", sc.length}};
  doc["ego"] = {{"s0_m", sc.ego.s0}, {"v0_mps", sc.ego.v0}, {"lane0", sc.ego.lane0}};
  doc["traffic"] = json::array();
  for (const auto& t : sc.traffic)
    doc["traffic"].push_back(
        {{"id", t.id}, {"lane", t.lane}, {"s0_m", t.s0}, {"v_mps", t.v}});
  doc["sim"] = {{"dt_s", sc.sim_dt},
                {"seed", sc.seed},
                {"vehicle_length_m", sc.vehicle_length},
                {"episode_cap_s", sc.episode_cap}};
  doc["planner"] = {
      {"horizon_steps", sc.planner.horizon},
      {"ts_s", sc.planner.ts},
      {"lane_change_steps", sc.planner.lane_change_steps},
      {"gamma1", sc.planner.gamma1},
      {"gamma2", sc.planner.gamma2},
      {"gamma3", sc.planner.gamma3},
      {"a_min_mps2", sc.planner.a_min},
      {"a_max_mps2", sc.planner.a_max},
      {"v_max_mps", sc.planner.v_max_vehicle},
      {"big_m", sc.planner.big_m},
      {"epsilon", sc.planner.epsilon},
      {"time_limit_s", sc.planner.time_limit},
      {"lazy_lane_constraints", sc.planner.lazy_lane_constraints},
      {"sensing_range_m", sc.planner.sensing_range},
      {"formulation",
       sc.planner.formulation == Formulation::Binary ? "binary" : "integer"},
      {"safety",
       {{"d_min_m", sc.planner.safety.d_min},
        {"t_react_s", sc.planner.safety.t_react},
        {"a_brake_ego_mps2", sc.planner.safety.a_brake_ego},
        {"a_brake_other_mps2", sc.planner.safety.a_brake_other},
        {"gamma4", sc.planner.safety.gamma4}}},
      {"predictor",
       {{"accel_horizon_steps", sc.planner.predictor.accel_horizon},
        {"history_window", sc.planner.predictor.history_window}}}};
  doc["mobil"] = {{"politeness", sc.mobil.politeness},
                  {"a_threshold_mps2", sc.mobil.a_threshold},
                  {"b_safe_mps2", sc.mobil.b_safe},
                  {"idm_time_headway_s", sc.mobil.idm_time_headway},
                  {"idm_min_gap_m", sc.mobil.idm_min_gap},
                  {"idm_accel_mps2", sc.mobil.idm_accel},
                  {"idm_decel_mps2", sc.mobil.idm_decel}};
  return doc.dump(2);
}

}  // namespace slas
