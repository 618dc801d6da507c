#pragma once

#include <Eigen/Dense>

// Dense strictly-convex QP oracle for the brute-force suites:
//   min 0.5 x'Qx + c'x  s.t.  G x <= h
// solved by an infeasible-start primal-dual interior point method, entirely
// independent of the production solve path.
namespace oracle {

struct QpResult {
  bool feasible = false;
  bool converged = false;
  Eigen::VectorXd x;
  double objective = 0;
};

QpResult solve_qp(const Eigen::MatrixXd& q_mat, const Eigen::VectorXd& c,
                  const Eigen::MatrixXd& g_mat, const Eigen::VectorXd& h);

/// Phase 1: minimal uniform relaxation t with G x <= h + t. Feasible iff the
/// optimum is <= tol.
double min_relaxation(const Eigen::MatrixXd& g_mat, const Eigen::VectorXd& h);

}  // namespace oracle
