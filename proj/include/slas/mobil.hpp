#pragma once

#include <optional>

#include "slas/params.hpp"
#include "slas/vehicle.hpp"

namespace slas {

/// IDM acceleration toward a desired speed with an optional leader at
/// bumper gap `gap` meters driving at `v_lead`.
double idm_accel(double v, double v_desired, std::optional<double> gap,
                 double v_lead, const MobilParams& p);

/// MOBIL lane-change test over the adjacent lanes: returns the chosen target
/// lane (the current lane when no change passes the incentive and safety
/// tests). Gaps are evaluated on the snapshot's observed vehicles.
int mobil_decision(const WorldSnapshot& snapshot, const MobilParams& p);

/// Longitudinal advisory for the baselines: IDM tracking of the nearest
/// leader in `lane`, integrated over one planner period.
double idm_speed_command(const WorldSnapshot& snapshot, int lane,
                         double v_desired, double ts, const MobilParams& p,
                         double a_min, double a_max);

}  // namespace slas
