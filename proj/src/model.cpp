#include "slas/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "slas/safety.hpp"

namespace slas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string role_tag(const VarInfo& v) {
  switch (v.role) {
    case VarRole::Speed: return "v";
    case VarRole::Displacement: return "s";
    case VarRole::LaneSelector: return "L";
    case VarRole::LaneIndex: return "Li";
    case VarRole::FloorAux: return "l";
    case VarRole::AbsSelector: return "c";
    case VarRole::Membership: return "m";
    case VarRole::MembershipSide: return "d";
  }
  return "x";
}

}  // namespace

std::string var_name(const VarInfo& v) {
  std::string s = role_tag(v);
  if (v.lane >= 0) s += "_" + std::to_string(v.lane);
  if (v.vehicle >= 0) s += "_a" + std::to_string(v.vehicle);
  if (v.step >= 0) s += "(" + std::to_string(v.step) + ")";
  return s;
}

double LinearRow::value(std::span<const double> x) const {
  double v = 0;
  for (const auto& t : terms) v += t.coef * x[static_cast<size_t>(t.var)];
  return v;
}

double LinearRow::violation(std::span<const double> x) const {
  const double v = value(x);
  double out = 0;
  if (v < lb) out = lb - v;
  if (v > ub) out = std::max(out, v - ub);
  return out;
}

double OptimizationModel::eval_objective(std::span<const double> x) const {
  double obj = objective.constant;
  for (int i = 0; i < n_vars(); ++i) obj += objective.linear[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
  for (const auto& [i, j, w] : objective.quad)
    obj += w * x[static_cast<size_t>(i)] * x[static_cast<size_t>(j)];
  return obj;
}

double OptimizationModel::max_violation(std::span<const double> x,
                                        bool include_lazy) const {
  double worst = 0;
  for (int i = 0; i < n_vars(); ++i) {
    const auto& v = vars[static_cast<size_t>(i)];
    worst = std::max(worst, v.lb - x[static_cast<size_t>(i)]);
    worst = std::max(worst, x[static_cast<size_t>(i)] - v.ub);
  }
  for (const auto& r : rows) worst = std::max(worst, r.violation(x));
  if (include_lazy)
    for (const auto& r : lazy_rows) worst = std::max(worst, r.violation(x));
  return worst;
}

int OptimizationModel::lane_at(std::span<const double> x, int j) const {
  if (formulation == Formulation::Integer) {
    return static_cast<int>(std::llround(x[static_cast<size_t>(lane_var[static_cast<size_t>(j)])]));
  }
  int best = 0;
  double best_val = -kInf;
  for (int i = 0; i < lane_count; ++i) {
    const double v = x[static_cast<size_t>(selector_var[static_cast<size_t>(i)][static_cast<size_t>(j - 1)])];
    if (v > best_val + 1e-12) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

std::vector<double> OptimizationModel::complete_assignment(
    std::span<const double> speeds, std::span<const int> lanes) const {
  std::vector<double> x(static_cast<size_t>(n_vars()), 0.0);
  const int h = horizon;
  double prev_v = v0;
  double s = 0;
  for (int j = 1; j <= h; ++j) {
    const double vj = speeds[static_cast<size_t>(j - 1)];
    x[static_cast<size_t>(speed_var[static_cast<size_t>(j)])] = vj;
    s += 0.5 * (prev_v + vj) * step_time;
    x[static_cast<size_t>(disp_var[static_cast<size_t>(j)])] = s;
    prev_v = vj;
  }
  if (formulation == Formulation::Binary) {
    for (int j = 1; j <= h; ++j)
      for (int i = 0; i < lane_count; ++i)
        x[static_cast<size_t>(selector_var[static_cast<size_t>(i)][static_cast<size_t>(j - 1)])] =
            (lanes[static_cast<size_t>(j - 1)] == i) ? 1.0 : 0.0;
  } else {
    const int n_steps = lane_change_steps;
    for (int j = 1; j <= h; ++j)
      x[static_cast<size_t>(lane_var[static_cast<size_t>(j)])] = lanes[static_cast<size_t>(j - 1)];
    for (int j = 1; j <= h; ++j) {
      long long sum = 0;
      for (int i = 0; i < n_steps; ++i) {
        const int p = j - i;
        sum += (p >= 1) ? lanes[static_cast<size_t>(p - 1)] : lane0;
      }
      const long long num = 2 * sum + n_steps;
      const long long den = 2 * static_cast<long long>(n_steps);
      long long q = num / den;
      if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
      x[static_cast<size_t>(floor_var[static_cast<size_t>(j)])] = static_cast<double>(q);
    }
  }
  // Disjunction auxiliaries: per (vehicle, step) group, enumerate the binary
  // combination with the smallest violation over the group's rows.
  std::map<std::pair<int, int>, std::vector<int>> groups;
  for (int i = 0; i < n_vars(); ++i) {
    const auto& v = vars[static_cast<size_t>(i)];
    if (v.role == VarRole::AbsSelector || v.role == VarRole::Membership ||
        v.role == VarRole::MembershipSide)
      groups[{v.vehicle, v.step}].push_back(i);
  }
  for (const auto& [key, aux] : groups) {
    std::vector<const LinearRow*> group_rows;
    for (const auto& r : rows) {
      if (r.vehicle != key.first || r.step != key.second) continue;
      if (r.cls == RowClass::Safety || r.cls == RowClass::Membership)
        group_rows.push_back(&r);
    }
    const int combos = 1 << aux.size();
    double best = kInf;
    int best_combo = 0;
    for (int combo = 0; combo < combos; ++combo) {
      for (size_t b = 0; b < aux.size(); ++b)
        x[static_cast<size_t>(aux[b])] = (combo >> b) & 1 ? 1.0 : 0.0;
      double worst = 0;
      for (const auto* r : group_rows) worst = std::max(worst, r->violation(x));
      if (worst < best - 1e-12) {
        best = worst;
        best_combo = combo;
      }
    }
    for (size_t b = 0; b < aux.size(); ++b)
      x[static_cast<size_t>(aux[b])] = (best_combo >> b) & 1 ? 1.0 : 0.0;
  }
  return x;
}

std::string OptimizationModel::to_lp_text() const {
  std::ostringstream out;
  out << "minimize\n  " << objective.constant;
  for (int i = 0; i < n_vars(); ++i) {
    const double c = objective.linear[static_cast<size_t>(i)];
    if (c != 0) out << " + " << c << " " << var_name(vars[static_cast<size_t>(i)]);
  }
  for (const auto& [i, j, w] : objective.quad)
    out << " + " << w << " " << var_name(vars[static_cast<size_t>(i)]) << "*"
        << var_name(vars[static_cast<size_t>(j)]);
  out << "\nsubject to\n";
  auto dump_row = [&](const LinearRow& r, bool lazy) {
    out << "  ";
    if (lazy) out << "[lazy] ";
    if (r.lb > -kInf) out << r.lb << " <= ";
    bool first = true;
    for (const auto& t : r.terms) {
      if (!first) out << " + ";
      out << t.coef << " " << var_name(vars[static_cast<size_t>(t.var)]);
      first = false;
    }
    if (r.ub < kInf) out << " <= " << r.ub;
    out << "\n";
  };
  for (const auto& r : rows) dump_row(r, false);
  for (const auto& r : lazy_rows) dump_row(r, true);
  out << "bounds\n";
  for (int i = 0; i < n_vars(); ++i) {
    const auto& v = vars[static_cast<size_t>(i)];
    out << "  " << v.lb << " <= " << var_name(v) << " <= " << v.ub << "\n";
  }
  out << "integral\n ";
  for (int i = 0; i < n_vars(); ++i)
    if (vars[static_cast<size_t>(i)].is_integral())
      out << " " << var_name(vars[static_cast<size_t>(i)]);
  out << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Encodings
// ---------------------------------------------------------------------------

int encode_floor(OptimizationModel& model, const LinExpr& x, double x_lo,
                 double x_hi, double eps, int step) {
  VarInfo y;
  y.kind = VarKind::Integer;
  y.role = VarRole::FloorAux;
  y.lb = std::floor(x_lo) - 1;
  y.ub = std::floor(x_hi);
  y.step = step;
  const int y_id = model.n_vars();
  model.vars.push_back(y);
  model.objective.linear.push_back(0.0);

  // y <= x  ->  y - x <= 0
  LinearRow r1;
  r1.terms.push_back({y_id, 1.0});
  for (const auto& t : x.terms) r1.terms.push_back({t.var, -t.coef});
  r1.lb = -kInf;
  r1.ub = x.constant;
  r1.cls = RowClass::Floor;
  r1.step = step;
  model.rows.push_back(std::move(r1));

  // y + 1 >= x + eps  ->  y - x >= eps - 1
  LinearRow r2;
  r2.terms.push_back({y_id, 1.0});
  for (const auto& t : x.terms) r2.terms.push_back({t.var, -t.coef});
  r2.lb = eps - 1.0 + x.constant;
  r2.ub = kInf;
  r2.cls = RowClass::Floor;
  r2.step = step;
  model.rows.push_back(std::move(r2));
  return y_id;
}

LinearRow encode_implication(int a_var, const LinExpr& b, double big_m,
                             double eps) {
  // b + M*(1-a) >= 1 - eps  ->  b - M*a >= 1 - eps - M - b_const
  LinearRow r;
  for (const auto& t : b.terms) r.terms.push_back(t);
  r.terms.push_back({a_var, -big_m});
  r.lb = 1.0 - eps - big_m - b.constant;
  r.ub = kInf;
  r.cls = RowClass::Adjacency;
  return r;
}

int encode_abs_safety(OptimizationModel& model, const LinExpr& delta_s,
                      const LinExpr& l_f, const LinExpr& l_r, int gate_var,
                      double big_m, int step, int vehicle) {
  VarInfo c;
  c.kind = VarKind::Binary;
  c.role = VarRole::AbsSelector;
  c.lb = 0;
  c.ub = 1;
  c.step = step;
  c.vehicle = vehicle;
  const int c_id = model.n_vars();
  model.vars.push_back(c);
  model.objective.linear.push_back(0.0);

  auto gate_terms = [&](LinearRow& r, double& rhs_shift) {
    if (gate_var >= 0) {
      r.terms.push_back({gate_var, -big_m});
      rhs_shift += big_m;
    }
  };

  // delta_s + M*c + M*(1-gate) - l_f >= 0
  LinearRow fwd;
  double shift = 0;
  for (const auto& t : delta_s.terms) fwd.terms.push_back(t);
  for (const auto& t : l_f.terms) fwd.terms.push_back({t.var, -t.coef});
  fwd.terms.push_back({c_id, big_m});
  gate_terms(fwd, shift);
  fwd.lb = l_f.constant - delta_s.constant - shift;
  fwd.ub = kInf;
  fwd.cls = RowClass::Safety;
  fwd.step = step;
  fwd.vehicle = vehicle;
  model.rows.push_back(std::move(fwd));

  // -delta_s + M*(1-c) + M*(1-gate) - l_r >= 0
  LinearRow rear;
  shift = big_m;  // from M*(1-c)
  for (const auto& t : delta_s.terms) rear.terms.push_back({t.var, -t.coef});
  for (const auto& t : l_r.terms) rear.terms.push_back({t.var, -t.coef});
  rear.terms.push_back({c_id, -big_m});
  gate_terms(rear, shift);
  rear.lb = l_r.constant + delta_s.constant - shift;
  rear.ub = kInf;
  rear.cls = RowClass::Safety;
  rear.step = step;
  rear.vehicle = vehicle;
  model.rows.push_back(std::move(rear));
  return c_id;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace {

struct BuildContext {
  const WorldSnapshot& snap;
  const std::map<int, PredictedTrajectory>& preds;
  const PlannerParams& params;
  SafetyParams sp;
  double v_cap;
  double big_m;
  std::vector<double> v_lo, v_hi;  // reachable speed box, 0..H
  std::vector<double> s_lo, s_hi;  // reachable displacement box, 0..H
  std::vector<double> dev_gain;    // gamma_d(delta(j)) * N * T_s, per step
};

BuildContext make_context(const WorldSnapshot& snap,
                          const std::map<int, PredictedTrajectory>& preds,
                          const PlannerParams& params, bool augmented) {
  BuildContext ctx{snap, preds, params, params.safety, 0, 0, {}, {}, {}};
  ctx.sp.lane_change_steps = params.lane_change_steps;
  ctx.sp.ts = params.ts;
  ctx.sp.lane_width = snap.lane_width;
  ctx.v_cap = params.speed_cap();
  ctx.big_m = params.big_m > 0 ? params.big_m : derive_big_m(snap, params);

  const int h = params.horizon;
  ctx.v_lo.resize(static_cast<size_t>(h) + 1);
  ctx.v_hi.resize(static_cast<size_t>(h) + 1);
  ctx.s_lo.resize(static_cast<size_t>(h) + 1);
  ctx.s_hi.resize(static_cast<size_t>(h) + 1);
  ctx.v_lo[0] = ctx.v_hi[0] = snap.ego.v;
  ctx.s_lo[0] = ctx.s_hi[0] = 0;
  for (int j = 1; j <= h; ++j) {
    ctx.v_lo[static_cast<size_t>(j)] =
        std::max(0.0, ctx.v_lo[static_cast<size_t>(j - 1)] + params.a_min * params.ts);
    ctx.v_hi[static_cast<size_t>(j)] =
        std::min(ctx.v_cap, ctx.v_hi[static_cast<size_t>(j - 1)] + params.a_max * params.ts);
    ctx.s_lo[static_cast<size_t>(j)] =
        ctx.s_lo[static_cast<size_t>(j - 1)] +
        0.5 * params.ts * (ctx.v_lo[static_cast<size_t>(j - 1)] + ctx.v_lo[static_cast<size_t>(j)]);
    ctx.s_hi[static_cast<size_t>(j)] =
        ctx.s_hi[static_cast<size_t>(j - 1)] +
        0.5 * params.ts * (ctx.v_hi[static_cast<size_t>(j - 1)] + ctx.v_hi[static_cast<size_t>(j)]);
  }

  ctx.dev_gain.assign(static_cast<size_t>(h) + 1, 0.0);
  if (augmented) {
    const DeviationState dev = deviation_from_lateral(
        snap.ego.lateral, snap.ego.prev_target, ctx.sp);
    for (int j = 1; j <= h; ++j) {
      const double delta_j = projected_deviation(dev, j, ctx.sp);
      ctx.dev_gain[static_cast<size_t>(j)] = deviation_cost(delta_j, ctx.sp) *
                                             params.lane_change_steps * params.ts;
    }
  }
  return ctx;
}

void check_predictions(const BuildContext& ctx) {
  for (const auto& veh : ctx.snap.vehicles) {
    auto it = ctx.preds.find(veh.id);
    if (it == ctx.preds.end())
      throw ModelBuildError("model: no prediction for vehicle " +
                            std::to_string(veh.id));
    if (static_cast<int>(it->second.displacements.size()) < ctx.params.horizon + 1)
      throw ModelBuildError("model: prediction horizon too short for vehicle " +
                            std::to_string(veh.id));
  }
}

/// Adds w * expr_a * expr_b ... only squares are needed: adds (expr)^2 * w.
void add_square(QuadObjective& obj, const LinExpr& e, double w) {
  for (size_t a = 0; a < e.terms.size(); ++a) {
    obj.quad.emplace_back(e.terms[a].var, e.terms[a].var,
                          w * e.terms[a].coef * e.terms[a].coef);
    for (size_t b = a + 1; b < e.terms.size(); ++b) {
      int i = e.terms[a].var, j = e.terms[b].var;
      double c = 2.0 * w * e.terms[a].coef * e.terms[b].coef;
      if (i > j) std::swap(i, j);
      obj.quad.emplace_back(i, j, c);
    }
  }
  if (e.constant != 0) {
    for (const auto& t : e.terms)
      obj.linear[static_cast<size_t>(t.var)] += 2.0 * w * e.constant * t.coef;
    obj.constant += w * e.constant * e.constant;
  }
}

int add_var(OptimizationModel& m, VarKind kind, VarRole role, double lb,
            double ub, int step, int lane = -1, int vehicle = -1) {
  VarInfo v;
  v.kind = kind;
  v.role = role;
  v.lb = lb;
  v.ub = ub;
  v.step = step;
  v.lane = lane;
  v.vehicle = vehicle;
  m.vars.push_back(v);
  m.objective.linear.push_back(0.0);
  return m.n_vars() - 1;
}

/// Speed/displacement variables, acceleration rows, displacement recursion,
/// and the speed part of the objective. Shared by both formulations.
void build_longitudinal(OptimizationModel& m, const BuildContext& ctx) {
  const auto& p = ctx.params;
  const int h = p.horizon;
  m.dv_lo = p.a_min * p.ts;
  m.dv_hi = p.a_max * p.ts;
  m.speed_var.assign(static_cast<size_t>(h) + 1, -1);
  m.disp_var.assign(static_cast<size_t>(h) + 1, -1);
  for (int j = 1; j <= h; ++j)
    m.speed_var[static_cast<size_t>(j)] =
        add_var(m, VarKind::Continuous, VarRole::Speed,
                ctx.v_lo[static_cast<size_t>(j)], ctx.v_hi[static_cast<size_t>(j)], j);
  for (int j = 1; j <= h; ++j)
    m.disp_var[static_cast<size_t>(j)] =
        add_var(m, VarKind::Continuous, VarRole::Displacement,
                ctx.s_lo[static_cast<size_t>(j)], ctx.s_hi[static_cast<size_t>(j)], j);

  for (int j = 2; j <= h; ++j) {
    LinearRow r;
    r.terms.push_back({m.speed_var[static_cast<size_t>(j)], 1.0});
    r.terms.push_back({m.speed_var[static_cast<size_t>(j - 1)], -1.0});
    r.lb = p.a_min * p.ts;
    r.ub = p.a_max * p.ts;
    r.cls = RowClass::Acceleration;
    r.step = j;
    m.rows.push_back(std::move(r));
  }
  for (int j = 1; j <= h; ++j) {
    LinearRow r;
    r.terms.push_back({m.disp_var[static_cast<size_t>(j)], 1.0});
    r.terms.push_back({m.speed_var[static_cast<size_t>(j)], -0.5 * p.ts});
    double rhs = 0;
    if (j == 1) {
      rhs = 0.5 * p.ts * ctx.snap.ego.v;
    } else {
      r.terms.push_back({m.disp_var[static_cast<size_t>(j - 1)], -1.0});
      r.terms.push_back({m.speed_var[static_cast<size_t>(j - 1)], -0.5 * p.ts});
    }
    r.lb = r.ub = rhs;
    r.cls = RowClass::Recursion;
    r.step = j;
    m.rows.push_back(std::move(r));
  }

  for (int j = 1; j <= h; ++j)
    m.objective.linear[static_cast<size_t>(m.speed_var[static_cast<size_t>(j)])] -= p.gamma1;
  for (int j = 1; j <= h; ++j) {
    LinExpr diff;
    diff.terms.push_back({m.speed_var[static_cast<size_t>(j)], 1.0});
    if (j == 1) {
      diff.constant = -ctx.snap.ego.v;
    } else {
      diff.terms.push_back({m.speed_var[static_cast<size_t>(j - 1)], -1.0});
    }
    add_square(m.objective, diff, p.gamma3);
  }
}

/// Per-(vehicle, step) safety rows. `lane_gate(a_lane, j, vehicle)` returns
/// the gating variable (-1 for none); membership rows are emitted inside it.
void build_safety_rows(OptimizationModel& m, const BuildContext& ctx,
                       bool augmented,
                       const std::function<int(int, int, int)>& lane_gate) {
  const auto& p = ctx.params;
  const int h = p.horizon;
  const double len = ctx.snap.vehicle_length;
  const double v_star = ctx.snap.ego.v;  // rear-margin linearization point

  for (const auto& veh : ctx.snap.vehicles) {
    const auto& pred = ctx.preds.at(veh.id);
    for (int j = 1; j <= h; ++j) {
      const double s_rel = pred.displacements[static_cast<size_t>(j)] - ctx.snap.ego.s;
      const double v_hat = pred.speeds[static_cast<size_t>(j)];
      const double g = augmented ? ctx.dev_gain[static_cast<size_t>(j)] : 0.0;

      const PairMargins pm = pair_margins(v_star, v_hat, len, ctx.sp);
      const double l_f = pm.fwd;
      const double rear_c = pm.rear_c;
      const double rear_v_coef = pm.rear_v_coef;
      const double rear_floor = pm.rear_floor;

      const double v_lo = ctx.v_lo[static_cast<size_t>(j)], v_hi = ctx.v_hi[static_cast<size_t>(j)];
      const double s_lo = ctx.s_lo[static_cast<size_t>(j)], s_hi = ctx.s_hi[static_cast<size_t>(j)];
      auto rear_req = [&](double v) {
        return std::max(rear_floor, rear_c + rear_v_coef * v) + g * v;
      };
      const double rear_req_max = std::max(rear_req(v_lo), rear_req(v_hi));
      const double rear_req_min = rear_floor + g * v_lo;
      const double fwd_req_max = l_f + g * v_hi;
      const double fwd_req_min = l_f + g * v_lo;

      // Reachability pruning: skip pairs satisfied by every feasible plan.
      const bool fwd_always = s_rel - s_hi >= fwd_req_max - 1e-9;
      const bool rear_always = s_lo - s_rel >= rear_req_max - 1e-9;
      if (fwd_always || rear_always) continue;

      const bool can_be_behind = s_rel - s_lo >= fwd_req_min - 1e-9;
      const bool can_be_ahead = s_hi - s_rel >= rear_req_min - 1e-9;

      const int gate = lane_gate(veh.lane, j, veh.id);
      const int vj = m.speed_var[static_cast<size_t>(j)];
      const int sj = m.disp_var[static_cast<size_t>(j)];

      LinExpr delta;  // s_rel - s(j)
      delta.terms.push_back({sj, -1.0});
      delta.constant = s_rel;

      LinExpr fwd_margin;
      fwd_margin.constant = l_f;
      if (g > 0) fwd_margin.terms.push_back({vj, g});

      LinExpr rear_margin;  // affine part; the d_min floor row follows
      rear_margin.constant = rear_c;
      rear_margin.terms.push_back({vj, rear_v_coef + g});

      auto gate_shift = [&](LinearRow& r, double& rhs) {
        if (gate >= 0) {
          r.terms.push_back({gate, -ctx.big_m});
          rhs -= ctx.big_m;
        }
      };

      if (can_be_behind && can_be_ahead) {
        const int c_id = encode_abs_safety(m, delta, fwd_margin, rear_margin,
                                           gate, ctx.big_m, j, veh.id);
        // Companion rear floor row sharing c: -delta + M(1-c) + M(1-gate) >= floor + g v
        LinearRow r;
        r.terms.push_back({sj, 1.0});
        if (g > 0) r.terms.push_back({vj, -g});
        r.terms.push_back({c_id, -ctx.big_m});
        double rhs = rear_floor + s_rel - ctx.big_m;
        gate_shift(r, rhs);
        r.lb = rhs;
        r.ub = kInf;
        r.cls = RowClass::Safety;
        r.step = j;
        r.vehicle = veh.id;
        m.rows.push_back(std::move(r));
      } else if (can_be_behind) {
        // Only the forward side is reachable: delta >= l_f + g v unless gated.
        LinearRow r;
        r.terms.push_back({sj, -1.0});
        if (g > 0) r.terms.push_back({vj, -g});
        double rhs = l_f - s_rel;
        gate_shift(r, rhs);
        r.lb = rhs;
        r.ub = kInf;
        r.cls = RowClass::Safety;
        r.step = j;
        r.vehicle = veh.id;
        m.rows.push_back(std::move(r));
      } else {
        // Only the rear side is reachable (or neither: rows force the gate off).
        LinearRow r1;
        r1.terms.push_back({sj, 1.0});
        r1.terms.push_back({vj, -(rear_v_coef + g)});
        double rhs1 = rear_c + s_rel;
        gate_shift(r1, rhs1);
        r1.lb = rhs1;
        r1.ub = kInf;
        r1.cls = RowClass::Safety;
        r1.step = j;
        r1.vehicle = veh.id;
        m.rows.push_back(std::move(r1));
        LinearRow r2;
        r2.terms.push_back({sj, 1.0});
        if (g > 0) r2.terms.push_back({vj, -g});
        double rhs2 = rear_floor + s_rel;
        gate_shift(r2, rhs2);
        r2.lb = rhs2;
        r2.ub = kInf;
        r2.cls = RowClass::Safety;
        r2.step = j;
        r2.vehicle = veh.id;
        m.rows.push_back(std::move(r2));
      }
    }
  }
}

}  // namespace

double derive_big_m(const WorldSnapshot& snapshot, const PlannerParams& params) {
  SafetyParams sp = params.safety;
  sp.lane_change_steps = params.lane_change_steps;
  sp.ts = params.ts;
  sp.lane_width = snapshot.lane_width;
  const double v_cap = params.speed_cap();
  const double max_base =
      min_safe_distance(v_cap, 0.0, sp, GapDirection::Forward) +
      snapshot.vehicle_length;
  const double max_margin =
      augmented_safe_distance(max_base, sp.gamma4, v_cap, sp);
  return 2.0 * params.sensing_range + v_cap * params.horizon * params.ts +
         max_margin + 10.0;
}

OptimizationModel build_binary_model(
    const WorldSnapshot& snapshot,
    const std::map<int, PredictedTrajectory>& preds,
    const PlannerParams& params) {
  BuildContext ctx = make_context(snapshot, preds, params, /*augmented=*/true);
  check_predictions(ctx);

  OptimizationModel m;
  m.formulation = Formulation::Binary;
  m.horizon = params.horizon;
  m.lane_count = snapshot.lane_count;
  m.lane0 = snapshot.ego.prev_target;  // L(k-1), per the cost-function choice
  m.v0 = snapshot.ego.v;
  m.ego_s = snapshot.ego.s;
  m.big_m = ctx.big_m;
  m.epsilon = params.epsilon;
  m.speed_cap = ctx.v_cap;
  m.step_time = params.ts;
  m.lane_change_steps = params.lane_change_steps;

  const int h = params.horizon;
  const int lanes = snapshot.lane_count;
  build_longitudinal(m, ctx);

  m.selector_var.assign(static_cast<size_t>(lanes), std::vector<int>(static_cast<size_t>(h), -1));
  for (int j = 1; j <= h; ++j)
    for (int i = 0; i < lanes; ++i)
      m.selector_var[static_cast<size_t>(i)][static_cast<size_t>(j - 1)] =
          add_var(m, VarKind::Binary, VarRole::LaneSelector, 0, 1, j, i);

  // One-hot lane selection per step.
  for (int j = 1; j <= h; ++j) {
    LinearRow r;
    for (int i = 0; i < lanes; ++i)
      r.terms.push_back({m.selector_var[static_cast<size_t>(i)][static_cast<size_t>(j - 1)], 1.0});
    r.lb = r.ub = 1.0;
    r.cls = RowClass::OneHot;
    r.step = j;
    m.rows.push_back(std::move(r));
  }

  // Adjacency implications; lazy when configured.
  auto& adjacency_sink = params.lazy_lane_constraints ? m.lazy_rows : m.rows;
  {
    // Step 0 -> 1: the step-0 lane is the constant prev target.
    LinExpr b;
    for (int bl = std::max(0, m.lane0 - 1); bl <= std::min(lanes - 1, m.lane0 + 1); ++bl)
      b.terms.push_back({m.selector_var[static_cast<size_t>(bl)][0], 1.0});
    LinearRow r;
    r.terms = b.terms;
    r.lb = 1.0 - params.epsilon;
    r.ub = kInf;
    r.cls = RowClass::Adjacency;
    r.step = 1;
    adjacency_sink.push_back(std::move(r));
  }
  for (int j = 1; j < h; ++j) {
    for (int a = 0; a < lanes; ++a) {
      LinExpr b;
      for (int bl = std::max(0, a - 1); bl <= std::min(lanes - 1, a + 1); ++bl)
        b.terms.push_back({m.selector_var[static_cast<size_t>(bl)][static_cast<size_t>(j)], 1.0});
      LinearRow r = encode_implication(
          m.selector_var[static_cast<size_t>(a)][static_cast<size_t>(j - 1)], b, ctx.big_m,
          params.epsilon);
      r.step = j + 1;
      adjacency_sink.push_back(std::move(r));
    }
  }

  // Lane-change objective on the linearized lane index.
  for (int j = 1; j <= h; ++j) {
    LinExpr diff;
    for (int i = 1; i < lanes; ++i)
      diff.terms.push_back({m.selector_var[static_cast<size_t>(i)][static_cast<size_t>(j - 1)],
                            static_cast<double>(i)});
    if (j == 1) {
      diff.constant = -static_cast<double>(m.lane0);
    } else {
      for (int i = 1; i < lanes; ++i)
        diff.terms.push_back({m.selector_var[static_cast<size_t>(i)][static_cast<size_t>(j - 2)],
                              -static_cast<double>(i)});
    }
    add_square(m.objective, diff, params.gamma2);
  }

  build_safety_rows(m, ctx, /*augmented=*/true, [&](int lane, int j, int) {
    return m.selector_var[static_cast<size_t>(lane)][static_cast<size_t>(j - 1)];
  });
  return m;
}

OptimizationModel build_integer_model(
    const WorldSnapshot& snapshot,
    const std::map<int, PredictedTrajectory>& preds,
    const PlannerParams& params) {
  BuildContext ctx = make_context(snapshot, preds, params, /*augmented=*/false);
  check_predictions(ctx);

  OptimizationModel m;
  m.formulation = Formulation::Integer;
  m.horizon = params.horizon;
  m.lane_count = snapshot.lane_count;
  m.lane0 = snapshot.ego.lane;  // initialization uses the physical lane
  m.v0 = snapshot.ego.v;
  m.ego_s = snapshot.ego.s;
  m.big_m = ctx.big_m;
  m.epsilon = params.epsilon;
  m.speed_cap = ctx.v_cap;
  m.step_time = params.ts;
  m.lane_change_steps = params.lane_change_steps;

  const int h = params.horizon;
  const int lanes = snapshot.lane_count;
  const int n_steps = params.lane_change_steps;
  build_longitudinal(m, ctx);

  m.lane_var.assign(static_cast<size_t>(h) + 1, -1);
  m.floor_var.assign(static_cast<size_t>(h) + 1, -1);
  for (int j = 1; j <= h; ++j) {
    // Adjacency narrows the reachable lane window around the initial lane.
    const double lb = std::max(0, m.lane0 - j);
    const double ub = std::min(lanes - 1, m.lane0 + j);
    m.lane_var[static_cast<size_t>(j)] =
        add_var(m, VarKind::Integer, VarRole::LaneIndex, lb, ub, j);
  }
  for (int j = 2; j <= h; ++j) {
    LinearRow r;
    r.terms.push_back({m.lane_var[static_cast<size_t>(j)], 1.0});
    r.terms.push_back({m.lane_var[static_cast<size_t>(j - 1)], -1.0});
    r.lb = -1.0;
    r.ub = 1.0;
    r.cls = RowClass::LaneStep;
    r.step = j;
    m.rows.push_back(std::move(r));
  }

  // Floor-encoded lane indicator dynamics.
  for (int j = 1; j <= h; ++j) {
    LinExpr x;
    x.constant = 0.5;
    for (int i = 0; i < n_steps; ++i) {
      const int p = j - i;
      if (p >= 1)
        x.terms.push_back({m.lane_var[static_cast<size_t>(p)], 1.0 / n_steps});
      else
        x.constant += static_cast<double>(m.lane0) / n_steps;
    }
    const int y = encode_floor(m, x, 0.5, lanes - 1 + 0.5, params.epsilon, j);
    m.floor_var[static_cast<size_t>(j)] = y;
    m.vars[static_cast<size_t>(y)].lb = 0;
    m.vars[static_cast<size_t>(y)].ub = lanes - 1;
  }

  // Lane-change objective on the integer lane variables.
  for (int j = 1; j <= h; ++j) {
    LinExpr diff;
    diff.terms.push_back({m.lane_var[static_cast<size_t>(j)], 1.0});
    if (j == 1)
      diff.constant = -static_cast<double>(m.lane0);
    else
      diff.terms.push_back({m.lane_var[static_cast<size_t>(j - 1)], -1.0});
    add_square(m.objective, diff, params.gamma2);
  }

  // Safety gated on the projected physical lane l(j) via membership binaries.
  build_safety_rows(m, ctx, /*augmented=*/false,
                    [&](int lane, int j, int vehicle) -> int {
    const int l_j = m.floor_var[static_cast<size_t>(j)];
    const int mem =
        add_var(m, VarKind::Binary, VarRole::Membership, 0, 1, j, lane, vehicle);
    const int side = add_var(m, VarKind::Binary, VarRole::MembershipSide, 0, 1, j,
                             lane, vehicle);
    // mem=0, side=0: l(j) >= lane+1; mem=0, side=1: l(j) <= lane-1;
    // mem=1: both rows vacuous, so l(j) = lane forces mem = 1.
    LinearRow r1;
    r1.terms.push_back({l_j, 1.0});
    r1.terms.push_back({side, ctx.big_m});
    r1.terms.push_back({mem, ctx.big_m});
    r1.lb = lane + 1.0;
    r1.ub = kInf;
    r1.cls = RowClass::Membership;
    r1.step = j;
    r1.vehicle = vehicle;
    m.rows.push_back(std::move(r1));
    LinearRow r2;
    r2.terms.push_back({l_j, -1.0});
    r2.terms.push_back({side, -ctx.big_m});
    r2.terms.push_back({mem, ctx.big_m});
    r2.lb = 1.0 - lane - ctx.big_m;
    r2.ub = kInf;
    r2.cls = RowClass::Membership;
    r2.step = j;
    r2.vehicle = vehicle;
    m.rows.push_back(std::move(r2));
    return mem;
  });
  return m;
}

OptimizationModel build_model(const WorldSnapshot& snapshot,
                              const std::map<int, PredictedTrajectory>& preds,
                              const PlannerParams& params) {
  return params.formulation == Formulation::Binary
             ? build_binary_model(snapshot, preds, params)
             : build_integer_model(snapshot, preds, params);
}

PlanHint warm_start_from(const PlanHint& prev) {
  PlanHint out;
  if (prev.empty()) return out;
  const size_t h = prev.speeds.size();
  out.speeds.resize(h);
  out.lanes.resize(h);
  for (size_t j = 0; j + 1 < h; ++j) {
    out.speeds[j] = prev.speeds[j + 1];
    out.lanes[j] = prev.lanes[j + 1];
  }
  out.speeds[h - 1] = prev.speeds[h - 1];
  out.lanes[h - 1] = prev.lanes[h - 1];
  return out;
}

}  // namespace slas
