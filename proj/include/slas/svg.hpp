#pragma once

#include <string>
#include <vector>

namespace slas {

struct PlotSeries {
  std::string label;
  std::string color;  // css color
  std::vector<std::pair<double, double>> points;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::vector<double> y_ticks;  // explicit tick positions; empty = automatic
  std::vector<double> x_ticks;
};

/// Self-contained SVG line plot; no external dependencies, diffable output.
std::string render_svg_plot(const PlotSpec& spec);
void write_svg_plot(const std::string& path, const PlotSpec& spec);

}  // namespace slas
