#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "slas/predictor.hpp"

using namespace slas;

namespace {

// Closed-form least squares, written independently of the implementation.
std::pair<double, double> ls_slope_and_last(const std::vector<SpeedSample>& h) {
  const double n = static_cast<double>(h.size());
  double st = 0, sv = 0, stt = 0, stv = 0;
  for (const auto& s : h) {
    st += s.t;
    sv += s.v;
    stt += s.t * s.t;
    stv += s.t * s.v;
  }
  const double slope = (n * stv - st * sv) / (n * stt - st * st);
  const double intercept = (sv - slope * st) / n;
  return {slope, intercept + slope * h.back().t};
}

}  // namespace

TEST_CASE("fit_speed_model matches the closed-form least squares") {
  SUBCASE("constant speed") {
    SpeedModel m = fit_speed_model(
        std::vector<SpeedSample>{{0, 10}, {0.4, 10}, {0.8, 10}});
    CHECK(m.a_bar == doctest::Approx(0.0));
    CHECK(m.v_bar == doctest::Approx(10.0));
  }
  SUBCASE("collinear points") {
    SpeedModel m =
        fit_speed_model(std::vector<SpeedSample>{{0, 8}, {0.4, 9}, {0.8, 10}});
    CHECK(m.a_bar == doctest::Approx(2.5));
    CHECK(m.v_bar == doctest::Approx(10.0));
  }
  SUBCASE("noisy points, frozen oracle values") {
    SpeedModel m =
        fit_speed_model(std::vector<SpeedSample>{{0, 8}, {0.4, 10}, {0.8, 9}});
    CHECK(m.a_bar == doctest::Approx(1.25));
    CHECK(m.v_bar == doctest::Approx(9.5));
  }
  SUBCASE("random histories agree with the independent formula") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> noise(-1, 1);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<SpeedSample> h;
      const int n = 2 + static_cast<int>(rng() % 9);
      for (int i = 0; i < n; ++i)
        h.push_back({0.4 * i, 8 + 0.3 * i + noise(rng)});
      auto [slope, last] = ls_slope_and_last(h);
      SpeedModel m = fit_speed_model(h);
      CHECK(m.a_bar == doctest::Approx(slope).epsilon(1e-9));
      CHECK(m.v_bar == doctest::Approx(last).epsilon(1e-9));
    }
  }
  SUBCASE("single sample is an error") {
    CHECK_THROWS_AS(fit_speed_model(std::vector<SpeedSample>{{0, 5}}),
                    InsufficientHistory);
  }
}

TEST_CASE("predict_speed piecewise-linear rollout with clamping") {
  SpeedModel constant{0, 5, 0, 3};
  CHECK(predict_speed(constant, 4, 5, 0.4, 15.0) ==
        std::vector<double>{5, 5, 5, 5, 5});

  SpeedModel accel{2.5, 10, 0, 3};
  CHECK(predict_speed(accel, 4, 2, 0.4, 15.0) ==
        std::vector<double>{10, 11, 12, 12, 12});

  SpeedModel brake{-5, 1, 0, 3};
  auto v = predict_speed(brake, 4, 3, 0.4, 15.0);
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(0.0));  // clamped at zero
  CHECK(v[2] == doctest::Approx(0.0));

  SUBCASE("upper clamp at the speed limit") {
    SpeedModel fast{10, 14, 0, 3};
    auto w = predict_speed(fast, 3, 3, 0.4, 15.0);
    for (double x : w) CHECK(x <= 15.0 + 1e-12);
  }
  SUBCASE("speeds constant beyond the acceleration horizon") {
    SpeedModel m{1.0, 5, 0, 4};
    auto w = predict_speed(m, 10, 3, 0.4, 15.0);
    for (int j = 4; j <= 10; ++j) CHECK(w[j] == doctest::Approx(w[3]));
  }
}

TEST_CASE("predict_displacement trapezoid") {
  CHECK(predict_displacement(0, std::vector<double>{10, 10, 10}, 0.4) ==
        std::vector<double>{0, 4, 8});
  auto d = predict_displacement(50, std::vector<double>{10, 11, 12}, 0.4);
  CHECK(d[0] == doctest::Approx(50));
  CHECK(d[1] == doctest::Approx(54.2));
  CHECK(d[2] == doctest::Approx(58.8));
  CHECK(predict_displacement(0, std::vector<double>{0, 0}, 0.7) ==
        std::vector<double>{0, 0});
}

TEST_CASE("predict_displacement equals step_longitudinal folded") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> sp(0, 15);
  std::vector<double> speeds;
  for (int i = 0; i < 20; ++i) speeds.push_back(sp(rng));
  auto d = predict_displacement(12.5, speeds, 0.4);
  double s = 12.5;
  for (size_t j = 1; j < speeds.size(); ++j) {
    s = step_longitudinal(s, speeds[j - 1], speeds[j], 0.4);
    CHECK(d[j] == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("predict_all composes per vehicle") {
  WorldSnapshot snap;
  snap.ego.s = 0;
  ObservedVehicle veh;
  veh.id = 4;
  veh.s = 30;
  veh.v = 8;
  veh.lane = 0;
  veh.speed_history = {{0, 8}, {0.4, 8}, {0.8, 8}};
  snap.vehicles.push_back(veh);

  PredictorParams pp;
  auto preds = predict_all(snap, 3, pp, 0.4, 15.0);
  REQUIRE(preds.count(4) == 1);
  const auto& traj = preds.at(4);
  CHECK_FALSE(traj.fallback);
  CHECK(traj.lane == 0);
  REQUIRE(traj.displacements.size() == 4);
  CHECK(traj.displacements[0] == doctest::Approx(30.0));
  CHECK(traj.displacements[1] == doctest::Approx(33.2));
  CHECK(traj.displacements[2] == doctest::Approx(36.4));
  CHECK(traj.displacements[3] == doctest::Approx(39.6));

  SUBCASE("empty observations -> empty map") {
    WorldSnapshot empty;
    CHECK(predict_all(empty, 3, pp, 0.4, 15.0).empty());
  }
  SUBCASE("one-sample history falls back to constant speed") {
    snap.vehicles[0].speed_history = {{0, 8}};
    auto p = predict_all(snap, 3, pp, 0.4, 15.0);
    CHECK(p.at(4).fallback);
    for (double v : p.at(4).speeds) CHECK(v == doctest::Approx(8.0));
  }
}

TEST_CASE("collinear histories reproduce the continued line") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> a_dist(-1.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = a_dist(rng), v0 = 5 + (rng() % 60) / 10.0;
    std::vector<SpeedSample> h;
    for (int i = 0; i < 6; ++i) h.push_back({0.4 * i, v0 + a * 0.4 * i});
    SpeedModel m = fit_speed_model(h);
    auto v = predict_speed(m, 8, 8, 0.4, 1e9);
    for (int j = 0; j <= 8; ++j) {
      const double expect = std::max(0.0, h.back().v + a * 0.4 * j);
      CHECK(v[j] == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}
