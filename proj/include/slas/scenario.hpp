#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "slas/params.hpp"
#include "slas/road.hpp"

namespace slas {

struct TrafficSeed {
  int id = 0;
  int lane = 0;
  double s0 = 0.0;  // m
  double v = 0.0;   // m/s, nominal speed held for the episode
};

struct EgoInit {
  double s0 = 0.0;
  double v0 = 0.0;
  int lane0 = 0;
};

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

/// A fully validated episode definition: road geometry, initial states,
/// simulation timing, and planner parameters.
struct Scenario {
  int lanes = 3;
  double lane_width = 3.5;    // m
  double speed_limit = 15.0;  // m/s
  double length = 350.0;      // m
  EgoInit ego;
  std::vector<TrafficSeed> traffic;
  double sim_dt = 0.05;  // s
  std::uint64_t seed = 0;
  PlannerParams planner;
  MobilParams mobil;
  double vehicle_length = 4.5;  // m
  double episode_cap = 120.0;   // s

  RoadModel road() const {
    return RoadModel(lanes, lane_width, speed_limit, length);
  }
  /// Throws ScenarioError when any invariant is violated.
  void validate() const;
};

/// Parses and validates a scenario document (JSON). `overrides` are dotted
/// key=value assignments applied to the document before parsing, e.g.
/// "planner.gamma2=100".
Scenario load_scenario(const std::string& text,
                       const std::vector<std::string>& overrides = {});
Scenario load_scenario_file(const std::string& path,
                            const std::vector<std::string>& overrides = {});

std::string scenario_to_json(const Scenario& sc);

}  // namespace slas
