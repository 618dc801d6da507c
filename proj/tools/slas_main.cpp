#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "slas/logging.hpp"
#include "slas/scenario.hpp"
#include "slas/simulator.hpp"
#include "slas/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slas;

namespace {

constexpr int kExitBadOutput = 2;
constexpr int kExitBadScenario = 3;

const char* series_color(size_t i) {
  static const char* colors[] = {"#1660c8", "#d0342c", "#2d8a33", "#8039b0"};
  return colors[i % 4];
}

struct CommonArgs {
  std::string scenario_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::string formulation;
  bool eager_lanes = false;
  int budget_ms = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool trace = false;
};

std::string default_out_dir() {
  if (const char* env = std::getenv("SLAS_OUT_DIR")) return env;
  return "out";
}

Scenario load_with_flags(const CommonArgs& args) {
  std::vector<std::string> overrides = args.overrides;
  if (!args.formulation.empty())
    overrides.push_back("planner.formulation=\"" + args.formulation + "\"");
  if (args.eager_lanes) overrides.push_back("planner.lazy_lane_constraints=false");
  if (args.budget_ms > 0)
    overrides.push_back("planner.time_limit_s=" +
                        std::to_string(args.budget_ms / 1000.0));
  if (args.seed_set) overrides.push_back("sim.seed=" + std::to_string(args.seed));
  return load_scenario_file(args.scenario_path, overrides);
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p / "plots", ec);
  if (ec || !fs::is_directory(p)) {
    std::cerr << "error: cannot create output directory " << dir << "\n";
    std::exit(kExitBadOutput);
  }
  return p;
}

void write_plots(const fs::path& out,
                 const std::vector<std::pair<std::string, const EpisodeLog*>>& runs,
                 const Scenario& sc) {
  PlotSpec time_plot, lat_plot, headway_plot;
  time_plot.title = "Travel time vs longitudinal displacement";
  time_plot.x_label = "longitudinal displacement [m]";
  time_plot.y_label = "travel time [s]";
  lat_plot.title = "Lane choice vs longitudinal displacement";
  lat_plot.x_label = "longitudinal displacement [m]";
  lat_plot.y_label = "lateral displacement [m]";
  for (int l = 0; l < sc.lanes; ++l) lat_plot.y_ticks.push_back(l * sc.lane_width);
  headway_plot.title = "Headway vs longitudinal displacement";
  headway_plot.x_label = "longitudinal displacement [m]";
  headway_plot.y_label = "headway [m]";

  size_t idx = 0;
  for (const auto& [name, log] : runs) {
    PlotSeries t_series{name, series_color(idx), {}};
    PlotSeries l_series{name, series_color(idx), {}};
    PlotSeries h_series{name, series_color(idx), {}};
    for (const auto& s : log->samples) {
      t_series.points.emplace_back(s.ego_s, s.t);
      l_series.points.emplace_back(s.ego_s, s.ego_lat);
      h_series.points.emplace_back(s.ego_s, s.headway);
    }
    time_plot.series.push_back(std::move(t_series));
    lat_plot.series.push_back(std::move(l_series));
    headway_plot.series.push_back(std::move(h_series));
    ++idx;
  }
  write_svg_plot((out / "plots" / "travel_time.svg").string(), time_plot);
  write_svg_plot((out / "plots" / "lateral.svg").string(), lat_plot);
  write_svg_plot((out / "plots" / "headway.svg").string(), headway_plot);
}

json run_summary(const std::string& policy, const EpisodeLog& log) {
  json j = json::parse(metrics_json(log.metrics));
  j["policy"] = policy;
  j["fallbacks"] = log.fallback_count;
  j["solves_total"] = log.solves_total;
  return j;
}

int episode_exit_code(const EpisodeLog& log) {
  return (log.collision || log.fallback_count > 0) ? 1 : 0;
}

int cmd_run(const CommonArgs& args, const std::string& policy_arg) {
  Scenario sc;
  try {
    sc = load_with_flags(args);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadScenario;
  }
  const fs::path out = prepare_out_dir(args.out_dir);
  const PolicyKind policy = policy_from_name(policy_arg);
  std::cout << "seed: " << sc.seed << "\n";

  EpisodeLog log = run_episode(sc, policy);
  write_episode_csv((out / "episode.csv").string(), log);
  write_text_file((out / "events.json").string(), events_json(log));
  json summary;
  summary["scenario"] = args.scenario_path;
  summary["seed"] = sc.seed;
  summary["overrides"] = args.overrides;
  summary["policies"] = {run_summary(policy_arg, log)};
  write_text_file((out / "summary.json").string(), summary.dump(2));
  write_plots(out, {{policy_arg, &log}}, sc);
  std::cout << "policy " << policy_arg << ": "
            << (log.completed ? "completed in " +
                                    std::to_string(log.metrics.travel_time) + " s"
                              : (log.collision ? "collision" : "timed out"))
            << ", artifacts in " << out << "\n";
  return episode_exit_code(log);
}

int cmd_compare(const CommonArgs& args, const std::vector<std::string>& policies) {
  if (policies.size() < 2) {
    std::cerr << "error: compare needs at least two policies\n";
    return 64;
  }
  Scenario sc;
  try {
    sc = load_with_flags(args);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadScenario;
  }
  const fs::path out = prepare_out_dir(args.out_dir);
  std::cout << "seed: " << sc.seed << "\n";

  std::vector<EpisodeLog> logs;
  for (const auto& name : policies)
    logs.push_back(run_episode(sc, policy_from_name(name)));

  json summary;
  summary["scenario"] = args.scenario_path;
  summary["seed"] = sc.seed;
  summary["overrides"] = args.overrides;
  summary["policies"] = json::array();
  std::vector<std::pair<std::string, const EpisodeLog*>> plot_runs;
  int exit_code = 0;
  for (size_t i = 0; i < policies.size(); ++i) {
    summary["policies"].push_back(run_summary(policies[i], logs[i]));
    write_episode_csv((out / ("episode_" + policies[i] + ".csv")).string(), logs[i]);
    write_text_file((out / ("events_" + policies[i] + ".json")).string(),
                    events_json(logs[i]));
    plot_runs.emplace_back(policies[i], &logs[i]);
    exit_code = std::max(exit_code, episode_exit_code(logs[i]));
  }
  // Pairwise ratios vs the first policy on the identical world.
  json ratios = json::array();
  for (size_t i = 1; i < policies.size(); ++i) {
    if (!logs[0].completed || !logs[i].completed) continue;
    json r;
    r["baseline"] = policies[i];
    r["travel_time_improvement_pct"] =
        100.0 * (logs[i].metrics.travel_time - logs[0].metrics.travel_time) /
        logs[i].metrics.travel_time;
    r["headway_improvement_pct"] =
        100.0 * (logs[0].metrics.mean_headway - logs[i].metrics.mean_headway) /
        std::max(1e-9, logs[i].metrics.mean_headway);
    ratios.push_back(r);
  }
  summary["ratios_vs_" + policies[0]] = ratios;
  write_text_file((out / "summary.json").string(), summary.dump(2));
  write_plots(out, plot_runs, sc);
  for (size_t i = 0; i < policies.size(); ++i)
    std::cout << policies[i] << ": "
              << (logs[i].completed
                      ? std::to_string(logs[i].metrics.travel_time) + " s"
                      : std::string(logs[i].collision ? "collision" : "incomplete"))
              << ", mean headway "
              << std::to_string(logs[i].metrics.mean_headway) << " m\n";
  return exit_code;
}

int cmd_montecarlo(const CommonArgs& args, const std::vector<std::string>& policies,
                   int runs) {
  Scenario sc;
  try {
    sc = load_with_flags(args);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadScenario;
  }
  const fs::path out = prepare_out_dir(args.out_dir);
  std::cout << "seed: " << sc.seed << ", runs: " << runs << "\n";
  std::vector<PolicyKind> kinds;
  for (const auto& p : policies) kinds.push_back(policy_from_name(p));
  MonteCarloResult mc = monte_carlo(sc, runs, kinds);
  write_text_file((out / "montecarlo.csv").string(), montecarlo_csv(mc));
  write_text_file((out / "montecarlo.json").string(), montecarlo_json(mc));
  int exit_code = 0;
  for (const auto& row : mc.rows) {
    std::cout << policy_name(row.policy) << ": comp_time "
              << row.columns[0].mean << " +- " << row.columns[0].stddev
              << " s over " << row.completed << "/" << row.runs << " runs";
    if (row.collisions) std::cout << ", collisions " << row.collisions;
    std::cout << "\n";
    if (row.collisions > 0 || row.fallbacks > 0) exit_code = 1;
  }
  std::cout << "table: " << (out / "montecarlo.csv") << "\n";
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speed and lane advisory planner: closed-loop highway episodes"};
  app.require_subcommand(1);

  CommonArgs args;
  args.out_dir = default_out_dir();

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", args.scenario_path, "scenario JSON path")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--set", args.overrides,
                    "dotted override key=value (repeatable)");
    cmd->add_option("--formulation", args.formulation, "binary|integer")
        ->check(CLI::IsMember({"binary", "integer"}));
    cmd->add_flag("--eager-lane-constraints", args.eager_lanes,
                  "disable the lazy adjacency constraints");
    cmd->add_option("--budget-ms", args.budget_ms, "solver budget per tick [ms]");
    cmd->add_option("--seed", args.seed, "override the scenario seed")
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_flag("--trace", args.trace, "per-solve node trace to stderr");
  };

  std::string policy = "slas";
  auto* run = app.add_subcommand("run", "run one episode");
  add_common(run);
  run->add_option("--policy", policy, "slas|mobil|nochange");

  std::vector<std::string> policies{"slas", "mobil", "nochange"};
  auto* compare = app.add_subcommand("compare", "identical-world comparison");
  add_common(compare);
  compare->add_option("--policy", policies, "two or more policies")->delimiter(',');

  int runs = 50;
  auto* mc = app.add_subcommand("montecarlo", "randomized campaign");
  add_common(mc);
  mc->add_option("--policy", policies, "policies")->delimiter(',');
  mc->add_option("--runs", runs, "number of randomized runs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(args, policy);
    if (compare->parsed()) return cmd_compare(args, policies);
    if (mc->parsed()) return cmd_montecarlo(args, policies, runs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
