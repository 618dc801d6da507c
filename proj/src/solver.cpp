#include "slas/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

namespace slas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int role_rank(VarRole role) {
  switch (role) {
    case VarRole::LaneSelector:
    case VarRole::LaneIndex:
      return 0;
    case VarRole::FloorAux:
      return 1;
    default:
      return 2;
  }
}

struct Node {
  Eigen::VectorXd lb, ub;
  std::shared_ptr<const AdmmState> warm;
  std::shared_ptr<const std::vector<int>> active_lazy;
  std::shared_ptr<const std::vector<int>> warm_active;  // set the state was solved under
  double bound = -kInf;
  int id = 0;
  int depth = 0;
};

struct NodeOrder {
  // Min-heap on (bound, id): smallest lower bound first, FIFO on ties.
  bool operator()(const std::shared_ptr<Node>& a,
                  const std::shared_ptr<Node>& b) const {
    if (a->bound != b->bound) return a->bound > b->bound;
    return a->id > b->id;
  }
};

double wall_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

MbqpSolver::MbqpSolver(const OptimizationModel& model, SolverOptions options)
    : model_(model), opts_(options), qp_(compile_qp(model)),
      engine_(qp_, options.admm) {
  for (int i = 0; i < model.n_vars(); ++i)
    if (model.vars[static_cast<size_t>(i)].is_integral()) branch_order_.push_back(i);
  std::sort(branch_order_.begin(), branch_order_.end(), [&](int a, int b) {
    const auto& va = model_.vars[static_cast<size_t>(a)];
    const auto& vb = model_.vars[static_cast<size_t>(b)];
    const int ra = role_rank(va.role), rb = role_rank(vb.role);
    if (ra != rb) return ra < rb;
    if (va.step != vb.step) return va.step < vb.step;
    if (va.lane != vb.lane) return va.lane < vb.lane;
    return a < b;
  });
}

QPRelaxationResult MbqpSolver::solve_qp_relaxation(
    const std::vector<std::pair<int, double>>& fixings, bool include_lazy) {
  std::vector<int> active;
  if (include_lazy) {
    active.resize(static_cast<size_t>(qp_.m_lazy()));
    for (int i = 0; i < qp_.m_lazy(); ++i) active[static_cast<size_t>(i)] = i;
  }
  const QpSystem& sys = engine_.system(active);
  Eigen::VectorXd lb(qp_.n), ub(qp_.n);
  for (int i = 0; i < qp_.n; ++i) {
    lb[i] = model_.vars[static_cast<size_t>(i)].lb;
    ub[i] = model_.vars[static_cast<size_t>(i)].ub;
  }
  for (const auto& [var, val] : fixings) {
    lb[var] = val;
    ub[var] = val;
  }
  QPRelaxationResult out;
  if (sys.interval_infeasible(lb, ub)) {
    out.status = QpStatus::Infeasible;
    return out;
  }
  AdmmState st = sys.cold_state(lb, ub);
  std::uint64_t work = 0;
  QpResult res = sys.solve(lb, ub, st, work);
  out.status = res.status;
  out.objective = res.objective;
  out.kkt_residual = res.kkt_residual;
  if (res.x.size() > 0)
    out.solution.assign(res.x.data(), res.x.data() + res.x.size());
  else
    out.solution.assign(st.x.data(), st.x.data() + st.x.size());
  return out;
}

std::vector<int> MbqpSolver::check_lazy(std::span<const double> x,
                                        const std::vector<int>& already_active) const {
  std::vector<int> violated;
  for (int i = 0; i < static_cast<int>(model_.lazy_rows.size()); ++i) {
    if (std::binary_search(already_active.begin(), already_active.end(), i))
      continue;
    if (model_.lazy_rows[static_cast<size_t>(i)].violation(x) > opts_.feas_tol)
      violated.push_back(i);
  }
  return violated;
}

SolveResult MbqpSolver::solve(const PlanHint* hint, double budget_s) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult out;
  const int n = qp_.n;
  const std::uint64_t budget_work = static_cast<std::uint64_t>(
      std::max(1.0, budget_s * static_cast<double>(opts_.work_per_second)));
  std::uint64_t work = 0;

  auto trace = [&](int id, int depth, double bound, const char* action) {
    if (opts_.trace)
      *opts_.trace << id << " " << depth << " " << bound << " " << action << "\n";
  };

  // --- Hint test: repair, complete, and evaluate before any relaxation.
  std::vector<double> incumbent;
  double incumbent_obj = kInf;
  std::vector<double> hint_full;  // guides the dive even when infeasible
  if (hint && !hint->empty() &&
      static_cast<int>(hint->speeds.size()) == model_.horizon) {
    std::vector<double> v = hint->speeds;
    std::vector<int> lanes = hint->lanes;
    double prev = model_.v0;
    for (size_t j = 0; j < v.size(); ++j) {
      // Project onto the reachable acceleration/speed box, step by step.
      const auto& var = model_.vars[static_cast<size_t>(model_.speed_var[j + 1])];
      const double lo = std::max(var.lb, prev + model_.dv_lo);
      const double hi = std::min(var.ub, prev + model_.dv_hi);
      v[j] = std::clamp(v[j], lo, hi);
      prev = v[j];
      lanes[j] = std::clamp(lanes[j], 0, model_.lane_count - 1);
    }
    hint_full = model_.complete_assignment(v, lanes);
    if (model_.max_violation(hint_full, /*include_lazy=*/true) <= opts_.feas_tol) {
      incumbent = hint_full;
      incumbent_obj = model_.eval_objective(hint_full);
      out.first_incumbent_time = wall_seconds(t0);
      out.first_incumbent_work = work;
      trace(-1, 0, incumbent_obj, "hint-incumbent");
    }
  }

  // --- Root node.
  auto root = std::make_shared<Node>();
  root->lb.resize(n);
  root->ub.resize(n);
  for (int i = 0; i < n; ++i) {
    root->lb[i] = model_.vars[static_cast<size_t>(i)].lb;
    root->ub[i] = model_.vars[static_cast<size_t>(i)].ub;
  }
  root->active_lazy = std::make_shared<const std::vector<int>>();
  root->bound = -kInf;
  int next_id = 1;

  std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>,
                      NodeOrder>
      open;
  std::shared_ptr<Node> current = root;
  bool root_numerical_ok = false;
  bool any_node_solved = false;

  auto finalize = [&](SolveStatus status) {
    out.status = status;
    if (!incumbent.empty()) {
      out.incumbent = incumbent;
      out.objective = incumbent_obj;
    }
    out.total_time = wall_seconds(t0);
    out.total_work = work;
    return out;
  };

  while (true) {
    if (!current) {
      if (open.empty())
        return finalize(!incumbent.empty()
                            ? SolveStatus::Optimal
                            : (any_node_solved || root_numerical_ok
                                   ? SolveStatus::Infeasible
                                   : SolveStatus::Error));
      current = open.top();
      open.pop();
    }
    // Budget check at node boundaries only (deterministic units).
    if (work >= budget_work) {
      if (!incumbent.empty()) return finalize(SolveStatus::FeasibleTimeout);
      return finalize(SolveStatus::Error);
    }
    if (current->bound >= incumbent_obj - 1e-9) {
      trace(current->id, current->depth, current->bound, "pruned-bound");
      current = nullptr;
      continue;
    }

    const QpSystem& sys = engine_.system(*current->active_lazy);
    if (sys.interval_infeasible(current->lb, current->ub)) {
      trace(current->id, current->depth, current->bound, "pruned-interval");
      current = nullptr;
      continue;
    }

    AdmmState state;
    if (current->warm)
      state = sys.adapt_state(*current->warm, *current->warm_active);
    QpResult relax = sys.solve(current->lb, current->ub, state, work);
    ++out.nodes_explored;

    if (relax.status == QpStatus::Infeasible) {
      trace(current->id, current->depth, current->bound, "infeasible");
      if (current->id == 0) root_numerical_ok = true;
      any_node_solved = true;
      current = nullptr;
      continue;
    }
    double node_bound = current->bound;
    if (relax.status == QpStatus::Solved) {
      any_node_solved = true;
      if (current->id == 0) root_numerical_ok = true;
      node_bound = std::max(
          node_bound, relax.objective -
                          (relax.polished ? 1e-8 : 5.0 * relax.kkt_residual));
      if (node_bound >= incumbent_obj - 1e-9) {
        trace(current->id, current->depth, node_bound, "pruned-bound");
        current = nullptr;
        continue;
      }
    }
    // Numerical failure keeps the parent bound and branches regardless.

    // Branch variable: earliest-step fractional lane decision first.
    const Eigen::VectorXd& x_rel =
        relax.x.size() > 0 ? relax.x : state.x;
    int branch_var = -1;
    for (int var : branch_order_) {
      if (current->lb[var] >= current->ub[var]) continue;  // frozen
      const double val = x_rel[var];
      if (std::abs(val - std::round(val)) > opts_.int_tol) {
        branch_var = var;
        break;
      }
    }

    if (branch_var < 0) {
      // Integer-feasible candidate: freeze every integral variable at its
      // rounded value and polish the continuous part.
      Eigen::VectorXd lb = current->lb, ub = current->ub;
      for (int var : branch_order_) {
        const double val =
            std::clamp(std::round(x_rel[var]), current->lb[var], current->ub[var]);
        lb[var] = val;
        ub[var] = val;
      }
      AdmmState polish_state = state;
      QpResult polish = sys.solve(lb, ub, polish_state, work);
      if (polish.status != QpStatus::Solved) {
        trace(current->id, current->depth, node_bound, "polish-failed");
        current = nullptr;
        continue;
      }
      const Eigen::VectorXd& x_pol =
          polish.x.size() > 0 ? polish.x : polish_state.x;
      std::vector<double> cand(x_pol.data(), x_pol.data() + x_pol.size());
      for (int var : branch_order_) cand[static_cast<size_t>(var)] = lb[var];

      const std::vector<int> violated = check_lazy(cand, *current->active_lazy);
      if (!violated.empty()) {
        auto grown = std::make_shared<std::vector<int>>(*current->active_lazy);
        grown->insert(grown->end(), violated.begin(), violated.end());
        std::sort(grown->begin(), grown->end());
        out.lazy_cuts_added += static_cast<int>(violated.size());
        trace(current->id, current->depth, node_bound, "lazy-cut");
        auto regrown = std::make_shared<Node>(*current);
        regrown->active_lazy = grown;
        regrown->warm = std::make_shared<const AdmmState>(std::move(state));
        regrown->warm_active = current->active_lazy;
        regrown->bound = node_bound;
        current = regrown;
        continue;  // re-solve the same subproblem with the cuts promoted
      }
      if (model_.max_violation(cand, /*include_lazy=*/false) <= opts_.feas_tol) {
        const double obj = model_.eval_objective(cand);
        if (obj < incumbent_obj - 1e-9) {
          const bool first = incumbent.empty();
          incumbent = cand;
          incumbent_obj = obj;
          if (first) {
            out.first_incumbent_time = wall_seconds(t0);
            out.first_incumbent_work = work;
          }
          trace(current->id, current->depth, obj, "incumbent");
        }
      } else {
        trace(current->id, current->depth, node_bound, "candidate-rejected");
      }
      current = nullptr;
      continue;
    }

    // Children: prefer the hint's value during the dive, else the rounding.
    double pref_val;
    if (!hint_full.empty() &&
        std::abs(hint_full[static_cast<size_t>(branch_var)] -
                 std::round(hint_full[static_cast<size_t>(branch_var)])) < 0.5) {
      pref_val = std::round(hint_full[static_cast<size_t>(branch_var)]);
    } else {
      pref_val = std::round(x_rel[branch_var]);
    }
    pref_val = std::clamp(pref_val, current->lb[branch_var], current->ub[branch_var]);

    // Split the domain at the relaxation value: [lb, floor(v)] and
    // [floor(v)+1, ub]; for binaries this is exactly {0} and {1}.
    double split_at = std::floor(std::clamp(
        x_rel[branch_var], current->lb[branch_var], current->ub[branch_var]));
    auto warm_shared = std::make_shared<const AdmmState>(std::move(state));
    if (split_at >= current->ub[branch_var]) split_at = current->ub[branch_var] - 1.0;
    auto down = std::make_shared<Node>();
    down->lb = current->lb;
    down->ub = current->ub;
    down->ub[branch_var] = split_at;
    auto up = std::make_shared<Node>();
    up->lb = current->lb;
    up->ub = current->ub;
    up->lb[branch_var] = split_at + 1.0;
    for (auto& child : {down, up}) {
      child->active_lazy = current->active_lazy;
      child->warm = warm_shared;
      child->warm_active = current->active_lazy;
      child->bound = node_bound;
      child->depth = current->depth + 1;
      child->id = next_id++;
    }
    trace(current->id, current->depth, node_bound, "branch");

    const bool prefer_up = pref_val >= split_at + 1.0;
    if (incumbent.empty()) {
      current = prefer_up ? up : down;
      open.push(prefer_up ? down : up);
    } else {
      open.push(down);
      open.push(up);
      current = nullptr;
    }
  }
}

}  // namespace slas
