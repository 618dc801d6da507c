#pragma once

#include <functional>
#include <map>
#include <optional>

#include "slas/model.hpp"
#include "slas/params.hpp"
#include "slas/solver.hpp"
#include "slas/vehicle.hpp"

namespace slas {

/// Projects the incumbent of a solve onto the first-step advisory command
/// plus the full horizon plan. Throws when the result carries no incumbent;
/// the caller then applies the keep-lane / match-leader fallback.
AdvisoryCommand extract_command(const SolveResult& result,
                                const OptimizationModel& model);

struct PlannerDiag {
  SolveStatus status = SolveStatus::Error;
  double objective = 0;
  int nodes = 0;
  int lazy_cuts = 0;
  std::uint64_t total_work = 0;
  double solve_wall_s = 0;
  double first_incumbent_wall_s = -1;
  bool fallback = false;
  bool hint_offered = false;
  int prediction_fallbacks = 0;
};

/// Receding-horizon orchestration: histories -> prediction -> model build ->
/// warm-started solve -> command extraction, with the fallback path on
/// infeasible or incumbent-less results.
class SlasPlanner {
 public:
  explicit SlasPlanner(const PlannerParams& params);

  AdvisoryCommand plan_step(const WorldSnapshot& snapshot);

  const PlannerDiag& last_diag() const { return diag_; }

  /// Invoked each tick with the history-merged snapshot and the offered hint
  /// (empty when none); used by the benchmark harnesses.
  std::function<void(const WorldSnapshot&, const PlanHint&)> tick_hook;

 private:
  AdvisoryCommand fallback_command(const WorldSnapshot& snapshot);

  PlannerParams params_;
  PlanHint prev_plan_;
  std::map<int, std::vector<SpeedSample>> history_;
  PlannerDiag diag_;
};

}  // namespace slas
