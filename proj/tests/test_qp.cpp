#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "slas/qp.hpp"

using namespace slas;

namespace {

OptimizationModel tiny_model(int n_vars) {
  OptimizationModel m;
  for (int i = 0; i < n_vars; ++i) {
    VarInfo v;
    v.kind = VarKind::Continuous;
    v.role = VarRole::Speed;
    v.lb = -1e3;
    v.ub = 1e3;
    m.vars.push_back(v);
    m.objective.linear.push_back(0);
  }
  return m;
}

QpResult run(const OptimizationModel& m, AdmmState& st) {
  CompiledQP qp = compile_qp(m);
  AdmmSettings settings;
  QpSystem sys(qp, {}, settings);
  Eigen::VectorXd lb(qp.n), ub(qp.n);
  for (int i = 0; i < qp.n; ++i) {
    lb[i] = m.vars[static_cast<size_t>(i)].lb;
    ub[i] = m.vars[static_cast<size_t>(i)].ub;
  }
  std::uint64_t work = 0;
  return sys.solve(lb, ub, st, work);
}

}  // namespace

TEST_CASE("box-constrained scalar quadratic") {
  // min (x-3)^2 with x in [0, 2] -> x = 2, objective 1.
  OptimizationModel m = tiny_model(1);
  m.vars[0].lb = 0;
  m.vars[0].ub = 2;
  m.objective.quad.emplace_back(0, 0, 1.0);
  m.objective.linear[0] = -6.0;
  m.objective.constant = 9.0;
  AdmmState st;
  QpResult res = run(m, st);
  REQUIRE(res.status == QpStatus::Solved);
  CHECK(st.x[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("single inequality row") {
  // min x^2 + y^2 s.t. x + y >= 2 -> (1, 1).
  OptimizationModel m = tiny_model(2);
  m.objective.quad.emplace_back(0, 0, 1.0);
  m.objective.quad.emplace_back(1, 1, 1.0);
  LinearRow r;
  r.terms = {{0, 1.0}, {1, 1.0}};
  r.lb = 2;
  r.ub = 1e30;
  m.rows.push_back(r);
  AdmmState st;
  QpResult res = run(m, st);
  REQUIRE(res.status == QpStatus::Solved);
  CHECK(st.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(st.x[1] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(res.objective == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("equality row") {
  // min x^2 + (y-1)^2 s.t. x + y = 1 -> (0, 1).
  OptimizationModel m = tiny_model(2);
  m.objective.quad.emplace_back(0, 0, 1.0);
  m.objective.quad.emplace_back(1, 1, 1.0);
  m.objective.linear[1] = -2.0;
  m.objective.constant = 1.0;
  LinearRow r;
  r.terms = {{0, 1.0}, {1, 1.0}};
  r.lb = r.ub = 1;
  m.rows.push_back(r);
  AdmmState st;
  QpResult res = run(m, st);
  REQUIRE(res.status == QpStatus::Solved);
  CHECK(st.x[0] == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(st.x[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("interval precheck and infeasibility certificate") {
  SUBCASE("interval-detectable") {
    OptimizationModel m = tiny_model(1);
    m.vars[0].lb = 0;
    m.vars[0].ub = 1;
    LinearRow r;
    r.terms = {{0, 1.0}};
    r.lb = 2;
    r.ub = 1e30;
    m.rows.push_back(r);
    CompiledQP qp = compile_qp(m);
    QpSystem sys(qp, {}, AdmmSettings{});
    Eigen::VectorXd lb(1), ub(1);
    lb << 0;
    ub << 1;
    CHECK(sys.interval_infeasible(lb, ub));
  }
  SUBCASE("certificate-detectable") {
    // x - y >= 1 and y - x >= 1 cannot both hold.
    OptimizationModel m = tiny_model(2);
    m.vars[0].lb = m.vars[1].lb = 0;
    m.vars[0].ub = m.vars[1].ub = 10;
    m.objective.quad.emplace_back(0, 0, 0.5);
    m.objective.quad.emplace_back(1, 1, 0.5);
    LinearRow r1;
    r1.terms = {{0, 1.0}, {1, -1.0}};
    r1.lb = 1;
    r1.ub = 1e30;
    LinearRow r2;
    r2.terms = {{0, -1.0}, {1, 1.0}};
    r2.lb = 1;
    r2.ub = 1e30;
    m.rows.push_back(r1);
    m.rows.push_back(r2);
    CompiledQP qp = compile_qp(m);
    QpSystem sys(qp, {}, AdmmSettings{});
    Eigen::VectorXd lb(2), ub(2);
    lb << 0, 0;
    ub << 10, 10;
    CHECK_FALSE(sys.interval_infeasible(lb, ub));
    AdmmState st;
    std::uint64_t work = 0;
    QpResult res = sys.solve(lb, ub, st, work);
    CHECK(res.status == QpStatus::Infeasible);
  }
}

TEST_CASE("warm start reduces iterations after a small bound change") {
  OptimizationModel m = tiny_model(6);
  for (int i = 0; i < 6; ++i) {
    m.vars[static_cast<size_t>(i)].lb = 0;
    m.vars[static_cast<size_t>(i)].ub = 10;
    m.objective.quad.emplace_back(i, i, 1.0);
    m.objective.linear[static_cast<size_t>(i)] = -2.0 * i;
  }
  LinearRow r;
  for (int i = 0; i < 6; ++i) r.terms.push_back({i, 1.0});
  r.lb = 3;
  r.ub = 12;
  m.rows.push_back(r);
  CompiledQP qp = compile_qp(m);
  QpSystem sys(qp, {}, AdmmSettings{});
  Eigen::VectorXd lb = Eigen::VectorXd::Zero(6), ub = Eigen::VectorXd::Constant(6, 10);
  AdmmState st;
  std::uint64_t work = 0;
  QpResult cold = sys.solve(lb, ub, st, work);
  REQUIRE(cold.status == QpStatus::Solved);
  // Re-solving from the converged state finishes within one check window.
  QpResult warm = sys.solve(lb, ub, st, work);
  REQUIRE(warm.status == QpStatus::Solved);
  CHECK(warm.iterations <= 25);
  CHECK(warm.iterations < cold.iterations);
}
