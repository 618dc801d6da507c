#include "slas/road.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slas {

RoadModel::RoadModel(int lane_count, double lane_width, double speed_limit,
                     double length)
    : base_count_(lane_count),
      lane_width_(lane_width),
      speed_limit_(speed_limit),
      length_(length) {
  if (lane_count < 1) throw std::invalid_argument("road: lane_count must be >= 1");
  if (lane_width <= 0) throw std::invalid_argument("road: lane_width must be > 0");
  if (speed_limit <= 0) throw std::invalid_argument("road: speed_limit must be > 0");
  if (length <= 0) throw std::invalid_argument("road: length must be > 0");
}

void RoadModel::set_lane_count_from(int from_step, int count) {
  if (count < 1) throw std::invalid_argument("road: lane_count must be >= 1");
  schedule_.emplace_back(from_step, count);
  std::sort(schedule_.begin(), schedule_.end());
}

int RoadModel::lane_count(int step) const {
  int count = base_count_;
  for (const auto& [from, c] : schedule_) {
    if (step >= from) count = c;
  }
  return count;
}

int RoadModel::nearest_lane(double lateral, int step) const {
  int idx = static_cast<int>(std::floor(lateral / lane_width_ + 0.5));
  return std::clamp(idx, 0, lane_count(step) - 1);
}

std::vector<int> lane_set(const RoadModel& road, int step) {
  std::vector<int> lanes(static_cast<size_t>(road.lane_count(step)));
  for (size_t i = 0; i < lanes.size(); ++i) lanes[i] = static_cast<int>(i);
  return lanes;
}

}  // namespace slas
