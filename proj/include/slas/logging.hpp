#pragma once

#include <string>
#include <vector>

#include "slas/scenario.hpp"
#include "slas/simulator.hpp"

namespace slas {

/// One row per simulator tick. Numbers print with enough digits to
/// round-trip exactly through load_episode_csv.
std::string episode_csv(const EpisodeLog& log);
void write_episode_csv(const std::string& path, const EpisodeLog& log);

/// Parses a document produced by episode_csv (header + samples only; solver
/// wall times and events live in the JSON sidecar).
EpisodeLog load_episode_csv(const std::string& text);

std::string events_json(const EpisodeLog& log);
std::string metrics_json(const Metrics& m);

std::string montecarlo_csv(const MonteCarloResult& result);
std::string montecarlo_json(const MonteCarloResult& result);

void write_text_file(const std::string& path, const std::string& content);
std::string format_double(double v);  // %.17g, exact round trip

}  // namespace slas
