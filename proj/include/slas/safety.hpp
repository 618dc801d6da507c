#pragma once

#include "slas/params.hpp"

namespace slas {

enum class GapDirection { Forward, Rear };

/// Signed lateral deviation past the previous target lane's near boundary,
/// clamped to [0, L_l/2]. Zero until the ego crosses into the target lane's
/// slab, L_l/2 once centered in it.
struct DeviationState {
  double delta_k = 0.0;  // m
  int prev_target = 0;
};

/// Minimum safe bumper-to-bumper gap. Forward: the ego follows a vehicle
/// driving at v_front. Rear: the ego leads and the follower drives at
/// v_front. Reaction time plus braking-distance difference, floored at d_min.
double min_safe_distance(double v_ego, double v_front, const SafetyParams& p,
                         GapDirection direction);

/// Deviation projected j steps ahead: min(delta_k + L_l*j/N, L_l/2).
double projected_deviation(const DeviationState& dev, int j,
                           const SafetyParams& p);

/// Dynamic deviation cost gamma_d = gamma4 * 2*|delta_j| / L_l.
double deviation_cost(double delta_j, const SafetyParams& p);

/// Augmented safe distance: L_s + gamma_d * v_j * N * T_s.
double augmented_safe_distance(double l_s, double gamma_d, double v_j,
                               const SafetyParams& p);

/// Deviation from the simulator's ground-truth lateral position given the
/// previous commanded target lane.
DeviationState deviation_from_lateral(double lateral, int prev_target,
                                      const SafetyParams& p);

/// Per-(vehicle, step) margin data of one safety row pair, center-to-center
/// (the vehicle length is folded in). The forward margin is evaluated at the
/// ego's reference speed; the rear margin is affine in the planned speed via
/// a tangent under-estimator of the ego's braking credit at that speed.
struct PairMargins {
  double fwd = 0;          // constant forward margin
  double rear_c = 0;       // rear affine intercept
  double rear_v_coef = 0;  // rear coefficient on the planned speed
  double rear_floor = 0;   // d_min + vehicle length
};
PairMargins pair_margins(double v_ego_ref, double v_hat_j, double vehicle_length,
                         const SafetyParams& p);

}  // namespace slas
