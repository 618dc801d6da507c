#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "slas/road.hpp"
#include "slas/scenario.hpp"
#include "slas/vehicle.hpp"

using namespace slas;

TEST_CASE("lane_set enumerates available lanes") {
  RoadModel road(3, 3.5, 15, 350);
  CHECK(lane_set(road, 0) == std::vector<int>{0, 1, 2});

  RoadModel single(1, 3.5, 15, 350);
  CHECK(lane_set(single, 7) == std::vector<int>{0});

  RoadModel dropping(3, 3.5, 15, 350);
  dropping.set_lane_count_from(100, 2);
  CHECK(lane_set(dropping, 50) == std::vector<int>{0, 1, 2});
  CHECK(lane_set(dropping, 150) == std::vector<int>{0, 1});
}

TEST_CASE("road model rejects bad geometry") {
  CHECK_THROWS(RoadModel(0, 3.5, 15, 350));
  CHECK_THROWS(RoadModel(3, -1, 15, 350));
  CHECK_THROWS(RoadModel(3, 3.5, 0, 350));
}

TEST_CASE("step_longitudinal trapezoid") {
  CHECK(step_longitudinal(0, 10, 10, 0.4) == doctest::Approx(4.0));
  CHECK(step_longitudinal(0, 0, 0, 0.4) == doctest::Approx(0.0));
  CHECK(step_longitudinal(100, 8, 9.4, 0.4) == doctest::Approx(103.48));
}

TEST_CASE("step_longitudinal is exact for constant acceleration") {
  // Composing k steps equals the closed form s = v0 t + a t^2 / 2.
  const double a = 1.7, v0 = 3.0, dt = 0.4;
  double s = 0, v = v0;
  for (int k = 1; k <= 50; ++k) {
    const double v_next = v0 + a * k * dt;
    s = step_longitudinal(s, v, v_next, dt);
    v = v_next;
    const double t = k * dt;
    CHECK(s == doctest::Approx(v0 * t + 0.5 * a * t * t).epsilon(1e-12));
  }
}

TEST_CASE("lane_indicator round-half-up of the mean") {
  CHECK(lane_indicator(std::vector<int>{1, 1, 1}) == 1);
  CHECK(lane_indicator(std::vector<int>{1, 1, 0}) == 1);
  CHECK(lane_indicator(std::vector<int>{1, 0, 0}) == 0);
  CHECK(lane_indicator(std::vector<int>{0, 1}) == 1);  // ties round up
}

TEST_CASE("lane_indicator stays within history range and is monotone") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    std::vector<int> hist(n);
    for (auto& h : hist) h = static_cast<int>(rng() % 4);
    const int out = lane_indicator(hist);
    CHECK(out >= *std::min_element(hist.begin(), hist.end()));
    CHECK(out <= *std::max_element(hist.begin(), hist.end()));
    auto bumped = hist;
    bumped[rng() % n] += 1;
    CHECK(lane_indicator(bumped) >= out);
  }
}

TEST_CASE("observe filters by range, inclusive, ordered by id") {
  EgoState ego;
  ego.s = 0;
  std::vector<ObservedVehicle> traffic;
  for (auto [id, s] : std::vector<std::pair<int, double>>{{3, 30}, {1, 50}, {2, 51}}) {
    ObservedVehicle v;
    v.id = id;
    v.s = s;
    traffic.push_back(v);
  }
  auto seen = observe(ego, traffic, 50);
  REQUIRE(seen.size() == 2);
  CHECK(seen[0].id == 1);  // s=50, boundary inclusive
  CHECK(seen[1].id == 3);

  CHECK(observe(ego, {}, 50).empty());

  ego.s = 100;
  ObservedVehicle far;
  far.id = 9;
  far.s = 49;
  CHECK(observe(ego, {far}, 50).empty());
}

TEST_CASE("observe is invariant under permutation of the input") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    EgoState ego;
    ego.s = 100;
    std::vector<ObservedVehicle> traffic;
    for (int i = 1; i <= 8; ++i) {
      ObservedVehicle v;
      v.id = i;
      v.s = 100 + static_cast<double>(rng() % 140) - 70.0;
      traffic.push_back(v);
    }
    auto a = observe(ego, traffic, 50);
    std::shuffle(traffic.begin(), traffic.end(), rng);
    auto b = observe(ego, traffic, 50);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].id == b[i].id);
  }
}

namespace {
const char* kMinimalScenario = R"JSON({
  "road": {"lanes": 3, "lane_width_m": 3.5, "speed_limit_mps": 15.0, "length_m": 350.0},
  "ego": {"s0_m": 0.0, "v0_mps": 5.0, "lane0": 1},
  "traffic": [
    {"id": 1, "lane": 1, "s0_m": 30.0, "v_mps": 5.0},
    {"id": 2, "lane": 0, "s0_m": 40.0, "v_mps": 8.0}
  ],
  "sim": {"dt_s": 0.05, "seed": 4},
  "planner": {"horizon_steps": 40, "ts_s": 0.4}
})JSON";
}

TEST_CASE("load_scenario parses and validates") {
  Scenario sc = load_scenario(kMinimalScenario);
  CHECK(sc.lanes == 3);
  CHECK(sc.speed_limit == doctest::Approx(15.0));
  CHECK(sc.seed == 4);
  CHECK(sc.planner.horizon == 40);
  CHECK(sc.planner.v_limit == doctest::Approx(15.0));

  SUBCASE("missing key names the field") {
    CHECK_THROWS_WITH_AS(load_scenario(R"({"road": {"lanes": 3}})"),
                         doctest::Contains("road."), ScenarioError);
  }
  SUBCASE("negative lane width rejected") {
    CHECK_THROWS_AS(
        load_scenario(kMinimalScenario, {"road.lane_width_m=-1"}),
        ScenarioError);
  }
  SUBCASE("overlapping same-lane vehicles name both ids") {
    Scenario sc2 = load_scenario(kMinimalScenario);
    sc2.traffic[1].lane = 1;
    sc2.traffic[1].s0 = 31.0;
    try {
      sc2.validate();
      CHECK(false);
    } catch (const ScenarioError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("1") != std::string::npos);
      CHECK(msg.find("2") != std::string::npos);
    }
  }
  SUBCASE("dt must divide ts") {
    CHECK_THROWS_AS(load_scenario(kMinimalScenario, {"sim.dt_s=0.07"}),
                    ScenarioError);
  }
  SUBCASE("overrides are honored") {
    Scenario sc2 = load_scenario(kMinimalScenario, {"planner.gamma2=100"});
    CHECK(sc2.planner.gamma2 == doctest::Approx(100.0));
  }
}

TEST_CASE("scenario json round-trips") {
  Scenario sc = load_scenario(kMinimalScenario);
  Scenario back = load_scenario(scenario_to_json(sc));
  CHECK(back.lanes == sc.lanes);
  CHECK(back.traffic.size() == sc.traffic.size());
  CHECK(back.planner.gamma2 == doctest::Approx(sc.planner.gamma2));
}
