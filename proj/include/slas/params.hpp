#pragma once

namespace slas {

/// Parameters of the minimum safe distance and of the lane-change deviation
/// cost. Distances are bumper-to-bumper gaps; the model builder adds the
/// vehicle length when constraining center positions.
struct SafetyParams {
  double d_min = 2.0;          // m, standstill gap floor
  double t_react = 0.5;        // s
  double a_brake_ego = 5.0;    // m/s^2, |A_min|
  double a_brake_other = 5.0;  // m/s^2, assumed braking of the other vehicle
  double gamma4 = 1.0;         // weight of the dynamic deviation cost
  int lane_change_steps = 3;   // N
  double ts = 0.4;             // s
  double lane_width = 3.5;     // m, L_l
};

struct PredictorParams {
  int accel_horizon = 5;    // H_a, steps over which the fitted slope applies
  int history_window = 10;  // speed observations kept per vehicle
};

enum class Formulation { Binary, Integer };

struct PlannerParams {
  int horizon = 40;            // H, steps
  double ts = 0.4;             // s, planner period T_s
  int lane_change_steps = 3;   // N, steps per lane change
  double gamma1 = 1.0;         // speed reward weight
  double gamma2 = 0.1;         // lane-change penalty weight
  double gamma3 = 0.01;        // speed-change penalty weight
  double a_min = -5.0;         // m/s^2
  double a_max = 3.5;          // m/s^2
  double v_limit = 15.0;       // m/s, road speed limit V_l
  double v_max_vehicle = 15.0; // m/s, vehicle top speed V_m (defaults to V_l)
  double big_m = 0.0;          // 0 => derived from geometry at build time
  double epsilon = 0.1;        // feasibility tolerance of the encodings
  double time_limit = 0.2;     // s, solver budget per tick
  bool lazy_lane_constraints = true;
  Formulation formulation = Formulation::Binary;
  double sensing_range = 50.0; // m, R_v
  SafetyParams safety;
  PredictorParams predictor;

  double speed_cap() const {
    return v_max_vehicle < v_limit ? v_max_vehicle : v_limit;
  }
};

/// MOBIL lane-change criterion plus the IDM car-following model used for
/// its acceleration estimates and for the baseline longitudinal policies.
struct MobilParams {
  double politeness = 0.3;     // p
  double a_threshold = 0.1;    // m/s^2, incentive threshold
  double b_safe = -4.0;        // m/s^2, max deceleration imposed on new follower
  double idm_time_headway = 1.0;  // s
  double idm_min_gap = 2.0;       // m
  double idm_accel = 3.5;         // m/s^2
  double idm_decel = 2.5;         // m/s^2, comfortable braking
};

}  // namespace slas
