#pragma once

#include <utility>
#include <vector>

namespace slas {

/// Multi-lane highway segment in Frenet coordinates. Lane 0 is the leftmost
/// lane with respect to traffic flow; the center of lane i sits at a lateral
/// offset of i * lane_width meters. The number of usable lanes may change
/// over time (lane drops / openings) via a piecewise-constant schedule.
class RoadModel {
 public:
  RoadModel(int lane_count, double lane_width, double speed_limit,
            double length);

  /// Lane count becomes `count` for every step >= `from_step`.
  void set_lane_count_from(int from_step, int count);

  int lane_count(int step) const;
  double lane_width() const { return lane_width_; }
  double speed_limit() const { return speed_limit_; }
  double length() const { return length_; }

  double lane_center(int lane) const { return lane * lane_width_; }

  /// Lane whose center is nearest to `lateral`, clamped to the lanes
  /// available at `step`. Boundaries resolve by round-half-up.
  int nearest_lane(double lateral, int step) const;

 private:
  int base_count_;
  std::vector<std::pair<int, int>> schedule_;  // (from_step, count), ascending
  double lane_width_;
  double speed_limit_;
  double length_;
};

/// Set of lane indices available for travel at `step`: {0, ..., N_l(step)-1}.
std::vector<int> lane_set(const RoadModel& road, int step);

}  // namespace slas
