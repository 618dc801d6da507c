#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "slas/params.hpp"
#include "slas/predictor.hpp"
#include "slas/vehicle.hpp"

namespace slas {

enum class VarKind { Continuous, Binary, Integer };

/// Role drives the deterministic branching order: lane decisions first
/// (earliest step, then lane index), then floor auxiliaries, then the
/// disjunction selectors of the safety rows.
enum class VarRole {
  Speed,
  Displacement,
  LaneSelector,   // binary formulation: L~(i, j)
  LaneIndex,      // integer formulation: L(j)
  FloorAux,       // integer formulation: l(j)
  AbsSelector,    // Appendix C side selector c
  Membership,     // integer formulation: ego projected into vehicle's lane
  MembershipSide  // integer formulation: which side of the vehicle's lane
};

struct VarInfo {
  VarKind kind = VarKind::Continuous;
  VarRole role = VarRole::Speed;
  double lb = 0.0;
  double ub = 0.0;
  int step = -1;
  int lane = -1;
  int vehicle = -1;
  bool is_integral() const { return kind != VarKind::Continuous; }
};

std::string var_name(const VarInfo& v);

enum class RowClass {
  Acceleration,
  Recursion,
  OneHot,
  Adjacency,
  Safety,
  Floor,
  LaneStep,
  Membership
};

struct LinearTerm {
  int var;
  double coef;
};

struct LinearRow {
  std::vector<LinearTerm> terms;
  double lb;
  double ub;
  RowClass cls = RowClass::Safety;
  int step = -1;
  int vehicle = -1;
  double value(std::span<const double> x) const;
  double violation(std::span<const double> x) const;
};

/// Objective: sum of w * x_i * x_j terms plus a linear part and a constant.
struct QuadObjective {
  std::vector<std::tuple<int, int, double>> quad;  // (i, j, w) with i <= j
  std::vector<double> linear;
  double constant = 0.0;
};

/// One SLAS instance: variables, convex quadratic objective, linear rows
/// partitioned into eager and lazy sets, and an optional warm start.
struct OptimizationModel {
  Formulation formulation = Formulation::Binary;
  int horizon = 0;
  int lane_count = 0;
  int lane0 = 0;       // step-0 lane of the plan
  double v0 = 0.0;     // current ego speed
  double ego_s = 0.0;  // absolute ego position (displacements are relative)
  double big_m = 0.0;
  double epsilon = 0.1;
  double speed_cap = 0.0;
  double step_time = 0.4;
  int lane_change_steps = 3;
  double dv_lo = 0.0, dv_hi = 0.0;  // per-step speed change box, A*T_s

  std::vector<VarInfo> vars;
  QuadObjective objective;
  std::vector<LinearRow> rows;       // eager
  std::vector<LinearRow> lazy_rows;  // adjacency implications in lazy mode

  // Variable index lookup (entries -1 where a variable does not exist).
  std::vector<int> speed_var;                  // j in 1..H -> var id
  std::vector<int> disp_var;                   // j in 1..H -> var id
  std::vector<std::vector<int>> selector_var;  // [lane][j-1], binary model
  std::vector<int> lane_var;                   // j in 1..H, integer model
  std::vector<int> floor_var;                  // j in 1..H, integer model

  int n_vars() const { return static_cast<int>(vars.size()); }
  double eval_objective(std::span<const double> x) const;
  double max_violation(std::span<const double> x, bool include_lazy) const;

  /// Fills every variable from a (speeds, lanes) plan: displacements by
  /// recursion, selectors/floor auxiliaries by direct evaluation, and the
  /// disjunction selectors by choosing the satisfied side.
  std::vector<double> complete_assignment(std::span<const double> speeds,
                                          std::span<const int> lanes) const;

  /// Lane of the plan at step j (1..H) from a full assignment.
  int lane_at(std::span<const double> x, int j) const;

  std::string to_lp_text() const;
};

/// A shifted previous solution offered to the solver as a starting point.
struct PlanHint {
  std::vector<double> speeds;  // v(1..H)
  std::vector<int> lanes;      // L(1..H)
  bool empty() const { return speeds.empty(); }
};

struct AdvisoryCommand {
  int target_lane = 0;
  double ref_speed = 0.0;
  std::vector<double> plan_speeds;
  std::vector<int> plan_lanes;
  bool fallback = false;
};

// ---------------------------------------------------------------------------
// Constraint encodings (shared by both formulations; unit-tested standalone).
// ---------------------------------------------------------------------------

struct LinExpr {
  std::vector<LinearTerm> terms;
  double constant = 0.0;
};

/// Appendix-A flooring: introduces integer y with y <= x and y + 1 >= x + eps.
/// Returns the id of y. Encodes y = floor(x) exactly for every x whose
/// fractional part is at least eps away from 1.
int encode_floor(OptimizationModel& model, const LinExpr& x, double x_lo,
                 double x_hi, double eps, int step);

/// Appendix-B implication a=1 => b=1 as b + M*(1-a) >= 1 - eps. `b` may be a
/// sum of binaries (0/1-valued under the one-hot rows).
LinearRow encode_implication(int a_var, const LinExpr& b, double big_m,
                             double eps);

/// Appendix-C absolute-value disjunction with distinct forward and rear
/// margins: delta_s >= l_f or delta_s <= -l_r, selected by a fresh binary c.
/// When gate_var >= 0 both rows are additionally deactivated unless the gate
/// binary is 1 (big-M term M*(1-gate)). Returns the id of c.
int encode_abs_safety(OptimizationModel& model, const LinExpr& delta_s,
                      const LinExpr& l_f, const LinExpr& l_r, int gate_var,
                      double big_m, int step, int vehicle);

// ---------------------------------------------------------------------------
// Model builders
// ---------------------------------------------------------------------------

class ModelBuildError : public std::runtime_error {
 public:
  explicit ModelBuildError(const std::string& what) : std::runtime_error(what) {}
};

/// Integer formulation: integer target-lane variables, floor-encoded lane
/// indicator dynamics, and safety gated on the projected physical lane.
OptimizationModel build_integer_model(
    const WorldSnapshot& snapshot,
    const std::map<int, PredictedTrajectory>& preds, const PlannerParams& params);

/// Binary formulation: one-hot lane selectors, implication-encoded adjacency
/// (registered lazy when configured), and safety with the augmented distance.
OptimizationModel build_binary_model(
    const WorldSnapshot& snapshot,
    const std::map<int, PredictedTrajectory>& preds, const PlannerParams& params);

OptimizationModel build_model(const WorldSnapshot& snapshot,
                              const std::map<int, PredictedTrajectory>& preds,
                              const PlannerParams& params);

/// Shifted warm start: step j takes the previous plan's step j+1; the final
/// step duplicates the last value. Empty input yields an empty hint.
PlanHint warm_start_from(const PlanHint& prev);

/// Default big-M when params.big_m == 0: larger than any reachable |delta_s|
/// plus the largest augmented margin.
double derive_big_m(const WorldSnapshot& snapshot, const PlannerParams& params);

}  // namespace slas
