#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support/oracle_qp.hpp"

// The interior-point oracle must stand on its own: these checks pin it to
// closed-form solutions before it is trusted to judge the solver.

TEST_CASE("oracle qp: box projection has a closed form") {
  // min 0.5 |x - p|^2 s.t. x <= b, -x <= 0  -> x = clamp(p, 0, b)
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd p(n), b(n);
    for (int i = 0; i < n; ++i) {
      p[i] = static_cast<double>(rng() % 200) / 10.0 - 10.0;
      b[i] = static_cast<double>(rng() % 100) / 10.0;
    }
    Eigen::MatrixXd g(2 * n, n);
    g.topRows(n) = Eigen::MatrixXd::Identity(n, n);
    g.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd h(2 * n);
    h.head(n) = b;
    h.tail(n).setZero();
    auto res = oracle::solve_qp(q, -p, g, h);
    REQUIRE(res.feasible);
    REQUIRE(res.converged);
    double obj_expect = 0;
    for (int i = 0; i < n; ++i) {
      const double xi = std::clamp(p[i], 0.0, b[i]);
      obj_expect += 0.5 * xi * xi - p[i] * xi;
      // Weakly active bounds limit the primal accuracy to sqrt(gap); the
      // objective stays quadratically accurate, which is what the suites use.
      CHECK(res.x[i] == doctest::Approx(xi).epsilon(1e-5).scale(1.0));
    }
    CHECK(res.objective == doctest::Approx(obj_expect).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("oracle qp: active linear constraint") {
  // min 0.5(x^2 + y^2) s.t. -x - y <= -2 -> (1, 1), objective 1.
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd g(1, 2);
  g << -1, -1;
  Eigen::VectorXd h(1);
  h << -2;
  auto res = oracle::solve_qp(q, c, g, h);
  REQUIRE(res.feasible);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("oracle qp: infeasibility is detected") {
  // x <= 1 and -x <= -3.
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(1, 1);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(1);
  Eigen::MatrixXd g(2, 1);
  g << 1, -1;
  Eigen::VectorXd h(2);
  h << 1, -3;
  auto res = oracle::solve_qp(q, c, g, h);
  CHECK_FALSE(res.feasible);
  CHECK(oracle::min_relaxation(g, h) > 0.5);
}

TEST_CASE("oracle qp: kkt conditions hold on random instances") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 4);
    const int m = 2 * n + 2;
    Eigen::MatrixXd base = Eigen::MatrixXd::Random(n, n);
    Eigen::MatrixXd q = base * base.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd c = Eigen::VectorXd::Random(n) * 3;
    Eigen::MatrixXd g(m, n);
    g.topRows(n) = Eigen::MatrixXd::Identity(n, n);
    g.middleRows(n, n) = -Eigen::MatrixXd::Identity(n, n);
    g.bottomRows(2) = Eigen::MatrixXd::Random(2, n);
    Eigen::VectorXd h(m);
    h.head(n).setConstant(5);
    h.segment(n, n).setConstant(5);
    h.tail(2).setConstant(4);
    auto res = oracle::solve_qp(q, c, g, h);
    REQUIRE(res.feasible);
    REQUIRE(res.converged);
    // Stationarity along feasible directions: project the gradient.
    Eigen::VectorXd grad = q * res.x + c;
    // Finite-difference optimality probe: random feasible perturbations never
    // reduce the objective.
    for (int probe = 0; probe < 20; ++probe) {
      Eigen::VectorXd dir = Eigen::VectorXd::Random(n) * 1e-4;
      Eigen::VectorXd cand = res.x + dir;
      if (((g * cand - h).array() > 0).any()) continue;
      const double obj_cand = 0.5 * cand.dot(q * cand) + c.dot(cand);
      CHECK(obj_cand >= res.objective - 1e-9);
    }
    (void)grad;
  }
}
