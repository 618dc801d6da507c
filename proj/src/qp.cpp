#include "slas/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace slas {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double CompiledQP::objective_at(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(p_mat * x) + q.dot(x) + obj_const;
}

CompiledQP compile_qp(const OptimizationModel& model) {
  CompiledQP qp;
  const int n = model.n_vars();
  qp.n = n;
  qp.q = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) qp.q[i] = model.objective.linear[static_cast<size_t>(i)];
  qp.obj_const = model.objective.constant;

  std::vector<Eigen::Triplet<double>> pt;
  for (const auto& [i, j, w] : model.objective.quad) {
    if (i == j) {
      pt.emplace_back(i, i, 2.0 * w);
    } else {
      pt.emplace_back(i, j, w);
      pt.emplace_back(j, i, w);
    }
  }
  qp.p_mat.resize(n, n);
  qp.p_mat.setFromTriplets(pt.begin(), pt.end());

  const int m_eager = static_cast<int>(model.rows.size());
  const int m_base = n + m_eager;
  std::vector<Eigen::Triplet<double>> at;
  qp.l_base = Eigen::VectorXd::Constant(m_base, -kInf);
  qp.u_base = Eigen::VectorXd::Constant(m_base, kInf);
  for (int i = 0; i < n; ++i) {
    at.emplace_back(i, i, 1.0);
    qp.l_base[i] = model.vars[static_cast<size_t>(i)].lb;
    qp.u_base[i] = model.vars[static_cast<size_t>(i)].ub;
  }
  for (int r = 0; r < m_eager; ++r) {
    const auto& row = model.rows[static_cast<size_t>(r)];
    for (const auto& t : row.terms) at.emplace_back(n + r, t.var, t.coef);
    qp.l_base[n + r] = row.lb;
    qp.u_base[n + r] = row.ub;
  }
  qp.a_base.resize(m_base, n);
  qp.a_base.setFromTriplets(at.begin(), at.end());

  const int m_lazy = static_cast<int>(model.lazy_rows.size());
  std::vector<Eigen::Triplet<double>> lt;
  qp.l_lazy = Eigen::VectorXd::Constant(m_lazy, -kInf);
  qp.u_lazy = Eigen::VectorXd::Constant(m_lazy, kInf);
  for (int r = 0; r < m_lazy; ++r) {
    const auto& row = model.lazy_rows[static_cast<size_t>(r)];
    for (const auto& t : row.terms) lt.emplace_back(r, t.var, t.coef);
    qp.l_lazy[r] = row.lb;
    qp.u_lazy[r] = row.ub;
  }
  qp.a_lazy.resize(m_lazy, n);
  qp.a_lazy.setFromTriplets(lt.begin(), lt.end());
  return qp;
}

QpSystem::QpSystem(const CompiledQP& qp, std::vector<int> active_lazy,
                   const AdmmSettings& settings)
    : qp_(&qp), active_lazy_(std::move(active_lazy)), settings_(settings) {
  const int n = qp.n;
  const int m_base = qp.m_base();
  m_ = m_base + static_cast<int>(active_lazy_.size());

  std::vector<Eigen::Triplet<double>> at;
  for (int k = 0; k < qp.a_base.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(qp.a_base, k); it; ++it)
      at.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  l_ = Eigen::VectorXd::Constant(m_, -kInf);
  u_ = Eigen::VectorXd::Constant(m_, kInf);
  l_.head(m_base) = qp.l_base;
  u_.head(m_base) = qp.u_base;
  for (size_t i = 0; i < active_lazy_.size(); ++i) {
    const int id = active_lazy_[i];
    const int r = m_base + static_cast<int>(i);
    l_[r] = qp.l_lazy[id];
    u_[r] = qp.u_lazy[id];
  }
  // a_lazy is column-major: gather activated rows by scanning all columns.
  if (!active_lazy_.empty()) {
    std::vector<int> row_pos(static_cast<size_t>(qp.m_lazy()), -1);
    for (size_t i = 0; i < active_lazy_.size(); ++i)
      row_pos[static_cast<size_t>(active_lazy_[i])] = m_base + static_cast<int>(i);
    for (int col = 0; col < qp.a_lazy.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(qp.a_lazy, col); it; ++it) {
        const int pos = row_pos[static_cast<size_t>(it.row())];
        if (pos >= 0) at.emplace_back(pos, col, it.value());
      }
  }
  a_.resize(m_, n);
  a_.setFromTriplets(at.begin(), at.end());

  rho_ = Eigen::VectorXd::Constant(m_, settings.rho);
  for (int r = 0; r < m_; ++r)
    if (l_[r] == u_[r]) rho_[r] = settings.rho * settings.rho_eq_scale;

  // Quasi-definite KKT matrix [[P + sigma I, A'], [A, -diag(1/rho)]].
  std::vector<Eigen::Triplet<double>> kt;
  for (int k = 0; k < qp.p_mat.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(qp.p_mat, k); it; ++it)
      kt.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int i = 0; i < n; ++i) kt.emplace_back(i, i, settings.sigma);
  for (int k = 0; k < a_.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a_, k); it; ++it) {
      kt.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      kt.emplace_back(static_cast<int>(it.col()), n + static_cast<int>(it.row()), it.value());
    }
  for (int r = 0; r < m_; ++r) kt.emplace_back(n + r, n + r, -1.0 / rho_[r]);
  Eigen::SparseMatrix<double> kkt(n + m_, n + m_);
  kkt.setFromTriplets(kt.begin(), kt.end());
  kkt_.compute(kkt);
  if (kkt_.info() != Eigen::Success)
    throw std::runtime_error("qp: KKT factorization failed");
}

AdmmState QpSystem::cold_state(const Eigen::VectorXd& var_lb,
                               const Eigen::VectorXd& var_ub) const {
  AdmmState st;
  const int n = qp_->n;
  st.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    double lo = var_lb[i], hi = var_ub[i];
    if (std::isfinite(lo) && std::isfinite(hi)) st.x[i] = 0.5 * (lo + hi);
    else if (std::isfinite(lo)) st.x[i] = lo;
    else if (std::isfinite(hi)) st.x[i] = hi;
  }
  st.z = a_ * st.x;
  st.y = Eigen::VectorXd::Zero(m_);
  return st;
}

AdmmState QpSystem::adapt_state(const AdmmState& other,
                                const std::vector<int>& other_active) const {
  if (other_active == active_lazy_) return other;
  AdmmState st;
  st.x = other.x;
  st.z = Eigen::VectorXd::Zero(m_);
  st.y = Eigen::VectorXd::Zero(m_);
  const int m_base = qp_->m_base();
  st.z.head(m_base) = other.z.head(m_base);
  st.y.head(m_base) = other.y.head(m_base);
  Eigen::VectorXd ax = a_ * st.x;
  for (size_t i = 0; i < active_lazy_.size(); ++i) {
    const int id = active_lazy_[i];
    const int r = m_base + static_cast<int>(i);
    auto it = std::find(other_active.begin(), other_active.end(), id);
    if (it != other_active.end()) {
      const int old_r = m_base + static_cast<int>(it - other_active.begin());
      st.z[r] = other.z[old_r];
      st.y[r] = other.y[old_r];
    } else {
      st.z[r] = std::clamp(ax[r], l_[r], u_[r]);
    }
  }
  return st;
}

bool QpSystem::interval_infeasible(const Eigen::VectorXd& var_lb,
                                   const Eigen::VectorXd& var_ub) const {
  const int n = qp_->n;
  for (int i = 0; i < n; ++i)
    if (var_lb[i] > var_ub[i] + 1e-12) return true;
  // Row ranges over the variable box (identity rows excluded: checked above).
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(m_), hi = Eigen::VectorXd::Zero(m_);
  for (int col = 0; col < a_.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a_, col); it; ++it) {
      const int r = static_cast<int>(it.row());
      if (r < n) continue;
      const double c = it.value();
      const double a = c * var_lb[col], b = c * var_ub[col];
      lo[r] += std::min(a, b);
      hi[r] += std::max(a, b);
    }
  for (int r = n; r < m_; ++r)
    if (lo[r] > u_[r] + 1e-9 || hi[r] < l_[r] - 1e-9) return true;
  return false;
}

namespace {

struct Residuals {
  double prim_abs, dual_abs, prim_scaled, dual_scaled;
};

}  // namespace

// Active-set refinement: equality-solve on the rows the ADMM iterate pins at
// a bound, with light regularization and iterative refinement. Residuals of a
// successful polish sit at machine precision, which backs the Solved claims.
bool QpSystem::polish(const Eigen::VectorXd& l, const Eigen::VectorXd& u,
                      const AdmmState& st, QpResult& res) const {
  const int n = qp_->n;
  std::vector<int> act;
  std::vector<double> act_val;
  std::vector<int> act_side;  // -1 lower, +1 upper, 0 equality
  for (int r = 0; r < m_; ++r) {
    if (l[r] == u[r]) {
      act.push_back(r);
      act_val.push_back(l[r]);
      act_side.push_back(0);
      continue;
    }
    // Multiplier sign picks the active side; the proximity guard drops rows
    // the iterate has not actually pinned (weakly active rows would
    // over-determine the reduced system).
    const double tol_low = 1e-3 * (1.0 + std::abs(l[r]));
    const double tol_up = 1e-3 * (1.0 + std::abs(u[r]));
    if (st.y[r] < 0 && std::isfinite(l[r]) && st.z[r] - l[r] <= tol_low) {
      act.push_back(r);
      act_val.push_back(l[r]);
      act_side.push_back(-1);
    } else if (st.y[r] > 0 && std::isfinite(u[r]) && u[r] - st.z[r] <= tol_up) {
      act.push_back(r);
      act_val.push_back(u[r]);
      act_side.push_back(+1);
    }
  }
  const int k = static_cast<int>(act.size());
  std::vector<Eigen::Triplet<double>> kt;
  for (int col = 0; col < qp_->p_mat.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(qp_->p_mat, col); it; ++it)
      kt.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                      it.value());
  const double reg = settings_.polish_reg;
  for (int i = 0; i < n; ++i) kt.emplace_back(i, i, reg);
  std::vector<int> row_pos(static_cast<size_t>(m_), -1);
  for (int i = 0; i < k; ++i) row_pos[static_cast<size_t>(act[static_cast<size_t>(i)])] = i;
  for (int col = 0; col < a_.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a_, col); it; ++it) {
      const int pos = row_pos[static_cast<size_t>(it.row())];
      if (pos < 0) continue;
      kt.emplace_back(n + pos, static_cast<int>(it.col()), it.value());
      kt.emplace_back(static_cast<int>(it.col()), n + pos, it.value());
    }
  for (int i = 0; i < k; ++i) kt.emplace_back(n + i, n + i, -reg);
  Eigen::SparseMatrix<double> kkt(n + k, n + k);
  kkt.setFromTriplets(kt.begin(), kt.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fact(kkt);
  if (fact.info() != Eigen::Success) return false;

  Eigen::VectorXd rhs(n + k);
  rhs.head(n) = -qp_->q;
  for (int i = 0; i < k; ++i) rhs[n + i] = act_val[static_cast<size_t>(i)];
  Eigen::VectorXd sol = fact.solve(rhs);
  // Two rounds of iterative refinement against the unregularized system.
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXd x = sol.head(n);
    Eigen::VectorXd nu = sol.tail(k);
    Eigen::VectorXd r(n + k);
    r.head(n) = -qp_->q - qp_->p_mat * x;
    for (int i = 0; i < k; ++i) r[n + i] = act_val[static_cast<size_t>(i)];
    for (int col = 0; col < a_.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(a_, col); it; ++it) {
        const int pos = row_pos[static_cast<size_t>(it.row())];
        if (pos < 0) continue;
        r[col] -= it.value() * nu[pos];
        r[n + pos] -= it.value() * x[col];
      }
    sol += fact.solve(r);
  }
  Eigen::VectorXd x = sol.head(n);
  Eigen::VectorXd nu = sol.tail(k);

  // Validate: primal feasibility, stationarity, and multiplier signs.
  Eigen::VectorXd ax = a_ * x;
  double viol = 0;
  for (int r = 0; r < m_; ++r)
    viol = std::max({viol, l[r] - ax[r], ax[r] - u[r]});
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m_);
  for (int i = 0; i < k; ++i) y[act[static_cast<size_t>(i)]] = nu[i];
  const double r_dual =
      (qp_->p_mat * x + qp_->q + a_.transpose() * y).cwiseAbs().maxCoeff();
  bool sign_ok = true;
  for (int i = 0; i < k; ++i) {
    if (act_side[static_cast<size_t>(i)] < 0 && nu[i] > 1e-7) sign_ok = false;
    if (act_side[static_cast<size_t>(i)] > 0 && nu[i] < -1e-7) sign_ok = false;
  }
  if (viol > settings_.viol_claim || r_dual > settings_.eps_claim || !sign_ok)
    return false;
  res.x = x;
  res.kkt_residual = std::max(viol, r_dual);
  res.violation = viol;
  res.objective = qp_->objective_at(x);
  res.polished = true;
  return true;
}

QpResult QpSystem::solve(const Eigen::VectorXd& var_lb,
                         const Eigen::VectorXd& var_ub, AdmmState& state,
                         std::uint64_t& work) const {
  const int n = qp_->n;
  QpResult res;
  Eigen::VectorXd l = l_, u = u_;
  l.head(n) = var_lb;
  u.head(n) = var_ub;

  if (!state.valid()) state = cold_state(var_lb, var_ub);
  Eigen::VectorXd& x = state.x;
  Eigen::VectorXd& z = state.z;
  Eigen::VectorXd& y = state.y;

  const double alpha = settings_.alpha;
  Eigen::VectorXd rhs(n + m_), sol(n + m_);
  Eigen::VectorXd ztilde(m_), z_prev(m_), ax(m_), dual(n);
  Eigen::VectorXd y_check = y;

  auto residuals = [&]() {
    Residuals r;
    ax = a_ * x;
    r.prim_abs = (ax - z).cwiseAbs().maxCoeff();
    const double prim_scale =
        std::max({1.0, ax.cwiseAbs().maxCoeff(), z.cwiseAbs().maxCoeff()});
    dual = qp_->p_mat * x + qp_->q + a_.transpose() * y;
    r.dual_abs = dual.cwiseAbs().maxCoeff();
    const double dual_scale = std::max(
        {1.0, (qp_->p_mat * x).cwiseAbs().maxCoeff(),
         (a_.transpose() * y).cwiseAbs().maxCoeff(), qp_->q.cwiseAbs().maxCoeff()});
    r.prim_scaled = r.prim_abs / prim_scale;
    r.dual_scaled = r.dual_abs / dual_scale;
    return r;
  };

  auto finish = [&](int iters) {
    res.iterations = iters;
    if (polish(l, u, state, res)) {
      res.status = QpStatus::Solved;
      return true;
    }
    // Fall back to the raw iterate when it already meets the strict claims.
    const Residuals r = residuals();
    res.kkt_residual = std::max(r.prim_abs, r.dual_abs);
    res.violation = r.prim_abs;
    res.x = x;
    res.objective = qp_->objective_at(x);
    if (res.kkt_residual <= settings_.eps_claim &&
        res.violation <= settings_.viol_claim) {
      res.status = QpStatus::Solved;
      return true;
    }
    return false;
  };

  double polish_gate = 1e-3;  // dual threshold for polish attempts, adaptive
  for (int iter = 1; iter <= settings_.max_iter; ++iter) {
    rhs.head(n) = settings_.sigma * x - qp_->q;
    rhs.tail(m_) = z - y.cwiseQuotient(rho_);
    sol = kkt_.solve(rhs);
    const auto x_tilde = sol.head(n);
    const auto nu = sol.tail(m_);
    ztilde = z + (nu - y).cwiseQuotient(rho_);
    x = alpha * x_tilde + (1.0 - alpha) * x;
    z_prev = z;
    Eigen::VectorXd z_cand =
        alpha * ztilde + (1.0 - alpha) * z_prev + y.cwiseQuotient(rho_);
    z = z_cand.cwiseMax(l).cwiseMin(u);
    y = rho_.cwiseProduct(z_cand - z);
    ++work;

    if (iter % settings_.check_interval == 0 || iter == settings_.max_iter) {
      const Residuals r = residuals();
      res.iterations = iter;
      const bool tight = r.prim_abs <= settings_.eps_abs + settings_.eps_rel &&
                         r.dual_abs <= settings_.eps_abs + settings_.eps_rel;
      const bool scaled_ok = r.prim_scaled <= settings_.eps_abs &&
                             r.dual_scaled <= settings_.eps_abs;
      const bool polishable =
          r.prim_scaled <= 1e-6 && r.dual_scaled <= polish_gate;
      if ((tight || scaled_ok || polishable) && finish(iter)) return res;
      if (polishable) polish_gate *= 0.3;  // failed: wait for more progress

      // Primal infeasibility certificate from the dual update direction.
      Eigen::VectorXd dy = y - y_check;
      const double dy_norm = dy.cwiseAbs().maxCoeff();
      if (dy_norm > 1e-12) {
        dy /= dy_norm;
        const double at_dy = (a_.transpose() * dy).cwiseAbs().maxCoeff();
        if (at_dy <= settings_.eps_pinf) {
          double support = 0;
          bool usable = true;
          for (int rr = 0; rr < m_ && usable; ++rr) {
            const double dv = dy[rr];
            if (dv > 1e-12) {
              if (!std::isfinite(u[rr])) usable = false;
              else support += u[rr] * dv;
            } else if (dv < -1e-12) {
              if (!std::isfinite(l[rr])) usable = false;
              else support += l[rr] * dv;
            }
          }
          if (usable && support < -settings_.eps_pinf) {
            res.status = QpStatus::Infeasible;
            return res;
          }
        }
      }
      y_check = y;
    }
  }
  // Last attempt at the iteration cap.
  if (finish(settings_.max_iter)) return res;
  res.status = QpStatus::NumericalFailure;
  return res;
}

const QpSystem& QpEngine::system(const std::vector<int>& active_lazy) {
  auto it = cache_.find(active_lazy);
  if (it == cache_.end()) {
    it = cache_
             .emplace(active_lazy,
                      std::make_unique<QpSystem>(*qp_, active_lazy, settings_))
             .first;
  }
  return *it->second;
}

}  // namespace slas
