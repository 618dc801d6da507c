#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "slas/model.hpp"

namespace slas {

/// The model compiled to matrices: objective 0.5 x'Px + q'x + c, and rows
/// l <= Ax <= u. Variable bounds form the leading identity block of the base
/// rows so that branching only ever changes bounds, never the matrices. Lazy
/// rows are kept aside and enter the system only when activated.
struct CompiledQP {
  int n = 0;
  Eigen::SparseMatrix<double> p_mat;
  Eigen::VectorXd q;
  double obj_const = 0;
  Eigen::SparseMatrix<double> a_base;  // [I; eager rows]
  Eigen::VectorXd l_base, u_base;
  Eigen::SparseMatrix<double> a_lazy;  // one row per lazy constraint
  Eigen::VectorXd l_lazy, u_lazy;
  int m_base() const { return static_cast<int>(a_base.rows()); }
  int m_lazy() const { return static_cast<int>(a_lazy.rows()); }

  double objective_at(const Eigen::VectorXd& x) const;
};

CompiledQP compile_qp(const OptimizationModel& model);

struct AdmmSettings {
  double rho = 0.001;
  double rho_eq_scale = 1e3;  // equality rows get rho * this
  double sigma = 1e-6;
  double alpha = 1.6;      // over-relaxation
  double eps_abs = 1e-5;   // ADMM termination, absolute part
  double eps_rel = 1e-5;   // ADMM termination, relative part
  double eps_claim = 1e-6;   // absolute KKT residual required to claim Solved
  double viol_claim = 1e-8;  // constraint violation required to claim Solved
  int max_iter = 20000;
  int check_interval = 10;
  double eps_pinf = 1e-6;     // primal infeasibility certificate scale
  double polish_reg = 1e-9;   // regularization of the active-set polish
};

struct AdmmState {
  Eigen::VectorXd x, z, y;
  bool valid() const { return x.size() > 0; }
};

enum class QpStatus { Solved, Infeasible, NumericalFailure };

struct QpResult {
  QpStatus status = QpStatus::NumericalFailure;
  double objective = 0;  // includes the objective constant
  double kkt_residual = 0;  // absolute, after polishing when it succeeded
  double violation = 0;     // worst constraint violation of the solution
  int iterations = 0;
  bool polished = false;
  Eigen::VectorXd x;  // the reported solution (polished when possible)
};

/// One KKT factorization for a fixed set of activated lazy rows. Row order of
/// z/y: [variable bounds; eager rows; activated lazy rows in ascending id].
class QpSystem {
 public:
  QpSystem(const CompiledQP& qp, std::vector<int> active_lazy,
           const AdmmSettings& settings);

  int n() const { return qp_->n; }
  int m() const { return m_; }
  const std::vector<int>& active_lazy() const { return active_lazy_; }

  /// ADMM with per-node variable bounds overriding the identity-row bounds.
  /// `state` is warm-started in and updated in place; `work` accumulates one
  /// unit per iteration.
  QpResult solve(const Eigen::VectorXd& var_lb, const Eigen::VectorXd& var_ub,
                 AdmmState& state, std::uint64_t& work) const;

  AdmmState cold_state(const Eigen::VectorXd& var_lb,
                       const Eigen::VectorXd& var_ub) const;

  /// Re-shapes a state produced under a different active-lazy set.
  AdmmState adapt_state(const AdmmState& other,
                        const std::vector<int>& other_active) const;

  /// Interval arithmetic over the variable boxes: true when some row is
  /// unsatisfiable by any point of the box.
  bool interval_infeasible(const Eigen::VectorXd& var_lb,
                           const Eigen::VectorXd& var_ub) const;

  bool polish(const Eigen::VectorXd& l, const Eigen::VectorXd& u,
              const AdmmState& state, QpResult& result) const;

 private:
  const CompiledQP* qp_;
  std::vector<int> active_lazy_;
  AdmmSettings settings_;
  int m_ = 0;
  Eigen::SparseMatrix<double> a_;  // stacked rows
  Eigen::VectorXd l_, u_;          // stacked bounds (vars section overridden per solve)
  Eigen::VectorXd rho_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> kkt_;
};

/// Factorization cache keyed by the activated lazy set.
class QpEngine {
 public:
  QpEngine(const CompiledQP& qp, AdmmSettings settings)
      : qp_(&qp), settings_(settings) {}
  const QpSystem& system(const std::vector<int>& active_lazy);

 private:
  const CompiledQP* qp_;
  AdmmSettings settings_;
  std::map<std::vector<int>, std::unique_ptr<QpSystem>> cache_;
};

}  // namespace slas
