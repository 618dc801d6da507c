#include "support/oracle_qp.hpp"

#include <cmath>

namespace oracle {

namespace {

struct IpmOut {
  bool converged = false;
  Eigen::VectorXd x;
};

// Primal-dual path following with slacks s > 0 and multipliers lam > 0.
IpmOut ipm(const Eigen::MatrixXd& q_mat, const Eigen::VectorXd& c,
           const Eigen::MatrixXd& g_mat, const Eigen::VectorXd& h) {
  const int n = static_cast<int>(q_mat.rows());
  const int m = static_cast<int>(g_mat.rows());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = (h - g_mat * x).cwiseMax(1.0);
  Eigen::VectorXd lam = Eigen::VectorXd::Ones(m);

  IpmOut out;
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::VectorXd r_dual = q_mat * x + c + g_mat.transpose() * lam;
    Eigen::VectorXd r_prim = g_mat * x + s - h;
    const double gap = s.dot(lam) / m;
    if (r_dual.lpNorm<Eigen::Infinity>() < 1e-10 &&
        r_prim.lpNorm<Eigen::Infinity>() < 1e-10 && gap < 1e-12) {
      out.converged = true;
      out.x = x;
      return out;
    }
    const double sigma = 0.2;
    const double mu = sigma * gap;

    Eigen::VectorXd d = lam.cwiseQuotient(s);
    Eigen::MatrixXd kkt = q_mat + g_mat.transpose() * d.asDiagonal() * g_mat;
    // r_cent = lam .* s - mu
    Eigen::VectorXd r_cent = lam.cwiseProduct(s).array() - mu;
    Eigen::VectorXd rhs =
        -(r_dual + g_mat.transpose() *
                       (d.cwiseProduct(r_prim) - r_cent.cwiseQuotient(s)));
    Eigen::LDLT<Eigen::MatrixXd> ldlt(kkt);
    if (ldlt.info() != Eigen::Success) return out;
    Eigen::VectorXd dx = ldlt.solve(rhs);
    Eigen::VectorXd dlam =
        d.cwiseProduct(g_mat * dx + r_prim) - r_cent.cwiseQuotient(s);
    Eigen::VectorXd ds = -r_prim - g_mat * dx;

    double alpha = 1.0;
    for (int i = 0; i < m; ++i) {
      if (ds[i] < 0) alpha = std::min(alpha, -0.99 * s[i] / ds[i]);
      if (dlam[i] < 0) alpha = std::min(alpha, -0.99 * lam[i] / dlam[i]);
    }
    x += alpha * dx;
    s += alpha * ds;
    lam += alpha * dlam;
  }
  out.x = x;
  return out;
}

}  // namespace

double min_relaxation(const Eigen::MatrixXd& g_mat, const Eigen::VectorXd& h) {
  const int n = static_cast<int>(g_mat.cols());
  const int m = static_cast<int>(g_mat.rows());
  // Variables (x, t): min 1e-9*|x|^2 + 0.5 t^2 + t  s.t. Gx - t <= h, -t <= 1e6.
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n + 1, n + 1);
  q.topLeftCorner(n, n) = 2e-9 * Eigen::MatrixXd::Identity(n, n);
  q(n, n) = 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
  c[n] = 1.0;
  Eigen::MatrixXd g(m + 1, n + 1);
  g.topLeftCorner(m, n) = g_mat;
  g.topRightCorner(m, 1) = -Eigen::VectorXd::Ones(m);
  g.bottomLeftCorner(1, n).setZero();
  g(m, n) = -1.0;
  Eigen::VectorXd hh(m + 1);
  hh.head(m) = h;
  hh[m] = 1e6;
  IpmOut out = ipm(q, c, g, hh);
  if (!out.converged) return 1e18;
  return out.x[n];
}

QpResult solve_qp(const Eigen::MatrixXd& q_mat, const Eigen::VectorXd& c,
                  const Eigen::MatrixXd& g_mat, const Eigen::VectorXd& h) {
  QpResult res;
  const double t = min_relaxation(g_mat, h);
  if (t > 1e-7) return res;  // infeasible
  res.feasible = true;
  IpmOut out = ipm(q_mat, c, g_mat, h);
  res.converged = out.converged;
  res.x = out.x;
  res.objective = 0.5 * out.x.dot(q_mat * out.x) + c.dot(out.x);
  return res;
}

}  // namespace oracle
