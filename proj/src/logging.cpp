#include "slas/logging.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace slas {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string episode_csv(const EpisodeLog& log) {
  std::ostringstream out;
  out << "t,ego_s,ego_v,ego_lat,ego_lane,cmd_lane,cmd_speed,headway,"
         "dist_closest,solve_status,nodes,lazy_cuts,objective,fallback";
  for (int id : log.vehicle_ids)
    out << ",s_" << id << ",v_" << id << ",lane_" << id;
  out << "\n";
  for (const auto& s : log.samples) {
    out << format_double(s.t) << "," << format_double(s.ego_s) << ","
        << format_double(s.ego_v) << "," << format_double(s.ego_lat) << ","
        << s.ego_lane << "," << s.cmd_lane << "," << format_double(s.cmd_speed)
        << "," << format_double(s.headway) << ","
        << format_double(s.dist_closest) << "," << s.solve_status << ","
        << s.nodes << "," << s.lazy_cuts << "," << format_double(s.objective)
        << "," << s.fallback;
    for (size_t i = 0; i < log.vehicle_ids.size(); ++i)
      out << "," << format_double(s.veh_s[i]) << "," << format_double(s.veh_v[i])
          << "," << s.veh_lane[i];
    out << "\n";
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

void write_episode_csv(const std::string& path, const EpisodeLog& log) {
  write_text_file(path, episode_csv(log));
}

EpisodeLog load_episode_csv(const std::string& text) {
  EpisodeLog log;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty document");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) header.push_back(col);
  }
  constexpr size_t kFixed = 14;
  if (header.size() < kFixed || (header.size() - kFixed) % 3 != 0)
    throw std::runtime_error("csv: unexpected column count");
  const size_t n_veh = (header.size() - kFixed) / 3;
  for (size_t i = 0; i < n_veh; ++i) {
    const std::string& col = header[kFixed + 3 * i];
    log.vehicle_ids.push_back(std::stoi(col.substr(2)));
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size())
      throw std::runtime_error("csv: ragged row");
    TickSample s;
    size_t c = 0;
    auto d = [&] { return std::stod(cells[c++]); };
    auto i = [&] { return std::stoi(cells[c++]); };
    s.t = d();
    s.ego_s = d();
    s.ego_v = d();
    s.ego_lat = d();
    s.ego_lane = i();
    s.cmd_lane = i();
    s.cmd_speed = d();
    s.headway = d();
    s.dist_closest = d();
    s.solve_status = i();
    s.nodes = i();
    s.lazy_cuts = i();
    s.objective = d();
    s.fallback = i();
    for (size_t v = 0; v < n_veh; ++v) {
      s.veh_s.push_back(d());
      s.veh_v.push_back(d());
      s.veh_lane.push_back(i());
    }
    log.samples.push_back(std::move(s));
  }
  return log;
}

std::string events_json(const EpisodeLog& log) {
  json doc;
  doc["events"] = json::array();
  for (const auto& e : log.events)
    doc["events"].push_back({{"t", e.t}, {"kind", e.kind}, {"detail", e.detail}});
  doc["collision"] = log.collision;
  doc["completed"] = log.completed;
  doc["fallback_count"] = log.fallback_count;
  doc["solves_total"] = log.solves_total;
  doc["solves_infeasible_after_feasible"] = log.solves_infeasible_after_feasible;
  doc["solve_wall_s"] = log.solve_wall_s;
  doc["first_incumbent_wall_s"] = log.first_incumbent_wall_s;
  doc["solve_statuses"] = log.solve_statuses;
  return doc.dump(2);
}

std::string metrics_json(const Metrics& m) {
  json doc;
  doc["completed"] = m.completed;
  doc["collision"] = m.collision;
  doc["travel_time_s"] = m.travel_time;
  doc["mean_headway_m"] = m.mean_headway;
  doc["min_dist_closest_m"] = m.min_dist_closest;
  doc["mean_dist_closest_m"] = m.mean_dist_closest;
  doc["long_accel_abs"] = {{"mean", m.long_accel_abs_mean}, {"std", m.long_accel_abs_std}};
  doc["long_jerk_abs"] = {{"mean", m.long_jerk_abs_mean}, {"std", m.long_jerk_abs_std}};
  doc["lat_accel_abs"] = {{"mean", m.lat_accel_abs_mean}, {"std", m.lat_accel_abs_std}};
  doc["lat_jerk_abs"] = {{"mean", m.lat_jerk_abs_mean}, {"std", m.lat_jerk_abs_std}};
  doc["brake_mean"] = m.brake_mean;
  doc["brake_jerk_mean"] = m.brake_jerk_mean;
  doc["throttle_mean"] = m.throttle_mean;
  doc["throttle_jerk_mean"] = m.throttle_jerk_mean;
  return doc.dump(2);
}

std::string montecarlo_csv(const MonteCarloResult& result) {
  std::ostringstream out;
  out << "policy,stat";
  for (const auto& c : kMonteCarloColumns) out << "," << c;
  out << ",mean_headway,long_jerk_abs,runs,completed,collisions,fallbacks,"
         "infeasible_after_feasible\n";
  for (const auto& row : result.rows) {
    out << policy_name(row.policy) << ",mean";
    for (const auto& c : row.columns) out << "," << format_double(c.mean);
    out << "," << format_double(row.mean_headway.mean) << ","
        << format_double(row.long_jerk_abs.mean) << "," << row.runs << ","
        << row.completed << "," << row.collisions << "," << row.fallbacks << ","
        << row.infeasible_after_feasible << "\n";
    out << policy_name(row.policy) << ",std";
    for (const auto& c : row.columns) out << "," << format_double(c.stddev);
    out << "," << format_double(row.mean_headway.stddev) << ","
        << format_double(row.long_jerk_abs.stddev) << "," << row.runs << ","
        << row.completed << "," << row.collisions << "," << row.fallbacks << ","
        << row.infeasible_after_feasible << "\n";
  }
  return out.str();
}

std::string montecarlo_json(const MonteCarloResult& result) {
  json doc;
  doc["skipped_runs"] = result.skipped_runs;
  doc["columns"] = kMonteCarloColumns;
  doc["rows"] = json::array();
  for (const auto& row : result.rows) {
    json r;
    r["policy"] = policy_name(row.policy);
    r["runs"] = row.runs;
    r["completed"] = row.completed;
    r["collisions"] = row.collisions;
    r["fallbacks"] = row.fallbacks;
    r["infeasible_after_feasible"] = row.infeasible_after_feasible;
    json cols;
    for (size_t c = 0; c < kMonteCarloColumns.size(); ++c)
      cols[kMonteCarloColumns[c]] = {{"mean", row.columns[c].mean},
                                     {"std", row.columns[c].stddev}};
    r["metrics"] = cols;
    r["mean_headway"] = {{"mean", row.mean_headway.mean},
                         {"std", row.mean_headway.stddev}};
    r["long_jerk_abs"] = {{"mean", row.long_jerk_abs.mean},
                          {"std", row.long_jerk_abs.stddev}};
    r["lat_jerk_abs"] = {{"mean", row.lat_jerk_abs.mean},
                         {"std", row.lat_jerk_abs.stddev}};
    doc["rows"].push_back(r);
  }
  return doc.dump(2);
}

}  // namespace slas
