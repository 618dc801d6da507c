#include "slas/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slas {

double step_longitudinal(double s, double v_prev, double v_next, double dt) {
  return s + 0.5 * (v_prev + v_next) * dt;
}

int lane_indicator(std::span<const int> history) {
  if (history.empty()) throw std::invalid_argument("lane_indicator: empty history");
  long long sum = 0;
  for (int l : history) sum += l;
  const long long n = static_cast<long long>(history.size());
  // floor(sum/n + 1/2) = floor((2*sum + n) / (2*n)), exact in integer math.
  long long num = 2 * sum + n;
  long long den = 2 * n;
  long long q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
  return static_cast<int>(q);
}

std::vector<ObservedVehicle> observe(const EgoState& ego,
                                     const std::vector<ObservedVehicle>& traffic,
                                     double r_v) {
  std::vector<ObservedVehicle> in_range;
  for (const auto& veh : traffic) {
    if (std::abs(veh.s - ego.s) <= r_v) in_range.push_back(veh);
  }
  std::sort(in_range.begin(), in_range.end(),
            [](const ObservedVehicle& a, const ObservedVehicle& b) { return a.id < b.id; });
  return in_range;
}

}  // namespace slas
