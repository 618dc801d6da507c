#include "slas/predictor.hpp"

#include <algorithm>
#include <cmath>

namespace slas {

SpeedModel fit_speed_model(std::span<const SpeedSample> history) {
  if (history.size() < 2) throw InsufficientHistory();
  const size_t n = history.size();
  double t_mean = 0, v_mean = 0;
  for (const auto& s : history) {
    t_mean += s.t;
    v_mean += s.v;
  }
  t_mean /= n;
  v_mean /= n;
  double sxy = 0, sxx = 0;
  for (const auto& s : history) {
    sxy += (s.t - t_mean) * (s.v - v_mean);
    sxx += (s.t - t_mean) * (s.t - t_mean);
  }
  SpeedModel m;
  m.a_bar = sxx > 0 ? sxy / sxx : 0.0;
  m.v_bar = v_mean + m.a_bar * (history.back().t - t_mean);
  m.sample_count = static_cast<int>(n);
  return m;
}

std::vector<double> predict_speed(const SpeedModel& model, int h, int h_a,
                                  double ts, double v_cap) {
  std::vector<double> speeds(static_cast<size_t>(h) + 1);
  speeds[0] = std::clamp(model.v_bar, 0.0, v_cap);
  for (int j = 1; j <= h; ++j) {
    double v = speeds[j - 1];
    if (j <= h_a) v += model.a_bar * ts;
    speeds[j] = std::clamp(v, 0.0, v_cap);
  }
  return speeds;
}

std::vector<double> predict_displacement(double s0,
                                         std::span<const double> speeds,
                                         double ts) {
  std::vector<double> disp(speeds.size());
  if (speeds.empty()) return disp;
  disp[0] = s0;
  for (size_t j = 1; j < speeds.size(); ++j)
    disp[j] = disp[j - 1] + 0.5 * ts * (speeds[j - 1] + speeds[j]);
  return disp;
}

std::map<int, PredictedTrajectory> predict_all(const WorldSnapshot& snapshot,
                                               int h,
                                               const PredictorParams& params,
                                               double ts, double v_cap) {
  std::map<int, PredictedTrajectory> out;
  for (const auto& veh : snapshot.vehicles) {
    PredictedTrajectory traj;
    traj.lane = veh.lane;
    SpeedModel model;
    try {
      model = fit_speed_model(veh.speed_history);
    } catch (const InsufficientHistory&) {
      model.a_bar = 0.0;
      model.v_bar = veh.v;
      model.sample_count = static_cast<int>(veh.speed_history.size());
      traj.fallback = true;
    }
    traj.speeds = predict_speed(model, h, params.accel_horizon, ts, v_cap);
    traj.displacements = predict_displacement(veh.s, traj.speeds, ts);
    out.emplace(veh.id, std::move(traj));
  }
  return out;
}

}  // namespace slas
