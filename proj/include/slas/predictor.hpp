#pragma once

#include <map>
#include <stdexcept>
#include <span>
#include <vector>

#include "slas/params.hpp"
#include "slas/vehicle.hpp"

namespace slas {

/// Linear speed model fitted to a vehicle's recent speed observations.
/// a_bar is the least-squares slope; v_bar the fitted value at the latest
/// observation time.
struct SpeedModel {
  double a_bar = 0.0;  // m/s^2
  double v_bar = 0.0;  // m/s
  int fitted_at = 0;   // planner step k
  int sample_count = 0;
};

struct PredictedTrajectory {
  std::vector<double> speeds;         // v_hat(0..H)
  std::vector<double> displacements;  // s_hat(0..H), absolute
  int lane = 0;
  bool fallback = false;  // constant-speed fallback (insufficient history)
};

class InsufficientHistory : public std::runtime_error {
 public:
  InsufficientHistory() : std::runtime_error("predictor: fewer than 2 samples") {}
};

/// Least-squares fit of speed against time. Throws InsufficientHistory with
/// fewer than 2 samples; the caller falls back to constant speed.
SpeedModel fit_speed_model(std::span<const SpeedSample> history);

/// Piecewise-linear speed rollout: the fitted slope applies for h_a steps,
/// then speed holds. Values are clamped to [0, v_cap].
std::vector<double> predict_speed(const SpeedModel& model, int h, int h_a,
                                  double ts, double v_cap);

/// Trapezoidal displacement rollout of a speed sequence starting at s0.
std::vector<double> predict_displacement(double s0,
                                         std::span<const double> speeds,
                                         double ts);

/// One trajectory per observed vehicle; lane held constant over the horizon.
std::map<int, PredictedTrajectory> predict_all(const WorldSnapshot& snapshot,
                                               int h,
                                               const PredictorParams& params,
                                               double ts, double v_cap);

}  // namespace slas
