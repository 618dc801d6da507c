#include "slas/safety.hpp"

#include <algorithm>
#include <cmath>

namespace slas {

double min_safe_distance(double v_ego, double v_front, const SafetyParams& p,
                         GapDirection direction) {
  double raw;
  if (direction == GapDirection::Forward) {
    raw = v_ego * p.t_react + v_ego * v_ego / (2.0 * p.a_brake_ego) -
          v_front * v_front / (2.0 * p.a_brake_other);
  } else {
    // Follower at v_front behind the ego: roles of the braking rates swap.
    raw = v_front * p.t_react + v_front * v_front / (2.0 * p.a_brake_other) -
          v_ego * v_ego / (2.0 * p.a_brake_ego);
  }
  return std::max(p.d_min, raw);
}

double projected_deviation(const DeviationState& dev, int j,
                           const SafetyParams& p) {
  const double grown = dev.delta_k + p.lane_width * j / p.lane_change_steps;
  return std::min(grown, 0.5 * p.lane_width);
}

double deviation_cost(double delta_j, const SafetyParams& p) {
  return p.gamma4 * 2.0 * std::abs(delta_j) / p.lane_width;
}

double augmented_safe_distance(double l_s, double gamma_d, double v_j,
                               const SafetyParams& p) {
  return l_s + gamma_d * v_j * p.lane_change_steps * p.ts;
}

PairMargins pair_margins(double v_ego_ref, double v_hat_j, double vehicle_length,
                         const SafetyParams& p) {
  PairMargins m;
  m.fwd = min_safe_distance(v_ego_ref, v_hat_j, p, GapDirection::Forward) +
          vehicle_length;
  m.rear_c = v_hat_j * p.t_react + v_hat_j * v_hat_j / (2.0 * p.a_brake_other) +
             v_ego_ref * v_ego_ref / (2.0 * p.a_brake_ego) + vehicle_length;
  m.rear_v_coef = -v_ego_ref / p.a_brake_ego;
  m.rear_floor = p.d_min + vehicle_length;
  return m;
}

DeviationState deviation_from_lateral(double lateral, int prev_target,
                                      const SafetyParams& p) {
  const double center = prev_target * p.lane_width;
  const double half = 0.5 * p.lane_width;
  const double inside = half - std::abs(lateral - center);
  DeviationState dev;
  dev.prev_target = prev_target;
  dev.delta_k = std::clamp(inside, 0.0, half);
  return dev;
}

}  // namespace slas
