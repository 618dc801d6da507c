#pragma once

#include <span>
#include <vector>

namespace slas {

struct SpeedSample {
  double t;  // seconds
  double v;  // m/s
};

/// Ego vehicle state in Frenet coordinates. `lane` is the integer lane
/// indicator; `lateral` is the continuous offset from the lane-0 center.
/// `target_lane_history` holds the last N commanded target lanes (most
/// recent last) and drives the lane-indicator dynamics.
struct EgoState {
  double s = 0.0;
  double v = 0.0;
  int lane = 0;
  double lateral = 0.0;
  std::vector<int> target_lane_history;
  int prev_target = 0;
};

struct ObservedVehicle {
  int id = 0;
  double s = 0.0;
  double v = 0.0;
  int lane = 0;
  std::vector<SpeedSample> speed_history;  // strictly time-ordered
};

/// One planner tick's view of the world: the optimizer's sole input.
struct WorldSnapshot {
  int step = 0;     // planner tick index k
  double time = 0;  // seconds
  EgoState ego;
  std::vector<ObservedVehicle> vehicles;  // observation-filtered, id-ascending
  int lane_count = 3;
  double lane_width = 3.5;     // m
  double speed_limit = 15.0;   // m/s
  double road_length = 350.0;  // m
  double vehicle_length = 4.5;  // m
};

/// Trapezoidal longitudinal update: s + (v_prev + v_next)/2 * dt.
double step_longitudinal(double s, double v_prev, double v_next, double dt);

/// Lane indicator from the last N target-lane commands:
/// floor(mean(history) + 1/2), i.e. round-half-up of the mean.
int lane_indicator(std::span<const int> history);

/// Vehicles within sensing range: |s_i - ego.s| <= r_v, ordered by id.
std::vector<ObservedVehicle> observe(const EgoState& ego,
                                     const std::vector<ObservedVehicle>& traffic,
                                     double r_v);

}  // namespace slas
