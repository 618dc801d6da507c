#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "slas/model.hpp"
#include "slas/qp.hpp"

namespace slas {

enum class SolveStatus { Optimal, FeasibleTimeout, Infeasible, Error };

struct SolveResult {
  SolveStatus status = SolveStatus::Error;
  std::optional<std::vector<double>> incumbent;
  double objective = 0;
  double first_incumbent_time = -1;  // wall seconds (reporting only)
  double total_time = 0;             // wall seconds (reporting only)
  std::uint64_t first_incumbent_work = 0;  // deterministic units
  std::uint64_t total_work = 0;
  int nodes_explored = 0;
  int lazy_cuts_added = 0;
};

struct QPRelaxationResult {
  QpStatus status = QpStatus::NumericalFailure;
  std::vector<double> solution;
  double objective = 0;  // valid lower bound when solved
  double kkt_residual = 0;
};

struct SolverOptions {
  AdmmSettings admm;
  double int_tol = 1e-5;   // integrality tolerance on relaxation values
  double feas_tol = 1e-6;  // feasibility tolerance for incumbents
  /// Deterministic wall-clock model: the budget in seconds is converted to
  /// ADMM-iteration units so that identical inputs explore identical trees.
  std::uint64_t work_per_second = 120000;
  std::ostream* trace = nullptr;
};

/// Deterministic best-first branch-and-bound for mixed-binary convex QPs:
/// hint test, depth-dive to a first incumbent, then best-first improvement
/// with lazy-constraint promotion on integer-feasible candidates.
class MbqpSolver {
 public:
  MbqpSolver(const OptimizationModel& model, SolverOptions options = {});

  SolveResult solve(const PlanHint* hint, double budget_s);

  /// Convex relaxation with binaries relaxed to [0,1]; `fixings` substitute
  /// values for a subset of the integral variables.
  QPRelaxationResult solve_qp_relaxation(
      const std::vector<std::pair<int, double>>& fixings,
      bool include_lazy = false);

  /// Ids of lazy rows violated beyond tolerance by a candidate assignment.
  std::vector<int> check_lazy(std::span<const double> x,
                              const std::vector<int>& already_active = {}) const;

 private:
  const OptimizationModel& model_;
  SolverOptions opts_;
  CompiledQP qp_;
  QpEngine engine_;
  std::vector<int> branch_order_;  // integral vars, deterministic priority
};

}  // namespace slas
