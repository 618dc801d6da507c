#include "slas/mobil.hpp"

#include <algorithm>
#include <cmath>

namespace slas {

namespace {

struct Neighbor {
  bool present = false;
  double s = 0, v = 0;
};

Neighbor leader_in(const WorldSnapshot& snap, int lane, double s_from) {
  Neighbor out;
  for (const auto& veh : snap.vehicles) {
    if (veh.lane != lane || veh.s <= s_from) continue;
    if (!out.present || veh.s < out.s) {
      out.present = true;
      out.s = veh.s;
      out.v = veh.v;
    }
  }
  return out;
}

Neighbor follower_in(const WorldSnapshot& snap, int lane, double s_from) {
  Neighbor out;
  for (const auto& veh : snap.vehicles) {
    if (veh.lane != lane || veh.s > s_from) continue;
    if (!out.present || veh.s > out.s) {
      out.present = true;
      out.s = veh.s;
      out.v = veh.v;
    }
  }
  return out;
}

double gap_between(double s_rear, double s_front, double veh_len) {
  return s_front - s_rear - veh_len;
}

}  // namespace

double idm_accel(double v, double v_desired, std::optional<double> gap,
                 double v_lead, const MobilParams& p) {
  const double vd = std::max(v_desired, 0.1);
  double a = p.idm_accel * (1.0 - std::pow(v / vd, 4));
  if (gap) {
    const double dv = v - v_lead;
    const double s_star =
        p.idm_min_gap + std::max(0.0, v * p.idm_time_headway +
                                          v * dv / (2.0 * std::sqrt(p.idm_accel *
                                                                    p.idm_decel)));
    const double g = std::max(*gap, 0.1);
    a -= p.idm_accel * (s_star / g) * (s_star / g);
  }
  return a;
}

int mobil_decision(const WorldSnapshot& snapshot, const MobilParams& p) {
  const auto& ego = snapshot.ego;
  const double len = snapshot.vehicle_length;
  const double v_desired = snapshot.speed_limit;

  auto ego_accel_in = [&](int lane) {
    Neighbor lead = leader_in(snapshot, lane, ego.s);
    std::optional<double> gap;
    if (lead.present) gap = gap_between(ego.s, lead.s, len);
    return idm_accel(ego.v, v_desired, gap, lead.present ? lead.v : 0.0, p);
  };
  auto follower_accel = [&](const Neighbor& fol, std::optional<double> gap,
                            double lead_v) {
    if (!fol.present) return 0.0;
    return idm_accel(fol.v, v_desired, gap, lead_v, p);
  };

  const double a_old = ego_accel_in(ego.lane);
  int best_lane = ego.lane;
  double best_score = p.a_threshold;

  for (int cand : {ego.lane - 1, ego.lane + 1}) {
    if (cand < 0 || cand >= snapshot.lane_count) continue;
    Neighbor new_lead = leader_in(snapshot, cand, ego.s);
    Neighbor new_fol = follower_in(snapshot, cand, ego.s);

    // Hard overlap test: no room at all.
    if (new_lead.present && gap_between(ego.s, new_lead.s, len) <= 0.5) continue;
    if (new_fol.present && gap_between(new_fol.s, ego.s, len) <= 0.5) continue;

    // Safety: the new follower must not be forced below b_safe.
    double fol_accel_after = 0.0;
    if (new_fol.present) {
      fol_accel_after = idm_accel(new_fol.v, v_desired,
                                  gap_between(new_fol.s, ego.s, len), ego.v, p);
      if (fol_accel_after < p.b_safe) continue;
    }

    const double a_new = ego_accel_in(cand);

    // Politeness: losses imposed on the new follower (the old follower only
    // gains when the ego leaves, so it is left out of the balance).
    double fol_accel_before = 0.0;
    if (new_fol.present) {
      std::optional<double> g;
      if (new_lead.present) g = gap_between(new_fol.s, new_lead.s, len);
      fol_accel_before = follower_accel(new_fol, g, new_lead.v);
    }
    const double score =
        (a_new - a_old) + p.politeness * (fol_accel_after - fol_accel_before);
    if (score > best_score + 1e-12) {
      best_score = score;
      best_lane = cand;
    }
  }
  return best_lane;
}

double idm_speed_command(const WorldSnapshot& snapshot, int lane,
                         double v_desired, double ts, const MobilParams& p,
                         double a_min, double a_max) {
  const auto& ego = snapshot.ego;
  const double len = snapshot.vehicle_length;
  double a = 1e18;
  // Respect the leaders of both the commanded lane and the physical lane.
  for (int l : {lane, ego.lane}) {
    Neighbor lead = leader_in(snapshot, l, ego.s);
    std::optional<double> gap;
    if (lead.present) gap = gap_between(ego.s, lead.s, len);
    a = std::min(a, idm_accel(ego.v, v_desired, gap, lead.present ? lead.v : 0.0, p));
    if (lane == ego.lane) break;
  }
  a = std::clamp(a, a_min, a_max);
  return std::clamp(ego.v + a * ts, 0.0, v_desired);
}

}  // namespace slas
