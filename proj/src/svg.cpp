#include "slas/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace slas {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<double> auto_ticks(double lo, double hi) {
  if (!(hi > lo)) hi = lo + 1;
  const double span = hi - lo;
  const double raw = span / 5;
  const double mag = std::pow(10, std::floor(std::log10(raw)));
  double step = mag;
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * mult >= raw) {
      step = mag * mult;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-12; t += step)
    ticks.push_back(t);
  return ticks;
}

}  // namespace

std::string render_svg_plot(const PlotSpec& spec) {
  const double w = 640, h = 440;
  const double ml = 62, mr = 16, mt = 34, mb = 46;

  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& s : spec.series)
    for (const auto& [x, y] : s.points) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  if (x_lo > x_hi) {
    x_lo = 0;
    x_hi = 1;
    y_lo = 0;
    y_hi = 1;
  }
  for (double t : spec.y_ticks) {
    y_lo = std::min(y_lo, t);
    y_hi = std::max(y_hi, t);
  }
  if (y_hi - y_lo < 1e-9) y_hi = y_lo + 1;
  const double y_pad = 0.05 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - y_lo) / (y_hi - y_lo) * (h - mt - mb); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << spec.title << "</text>\n";

  const auto xt = spec.x_ticks.empty() ? auto_ticks(x_lo, x_hi) : spec.x_ticks;
  const auto yt = spec.y_ticks.empty() ? auto_ticks(y_lo, y_hi) : spec.y_ticks;
  for (double t : xt) {
    if (t < x_lo - 1e-9 || t > x_hi + 1e-9) continue;
    out << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << mt << "\" x2=\""
        << fmt(px(t)) << "\" y2=\"" << h - mb
        << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fmt(px(t)) << "\" y=\"" << h - mb + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt(t) << "</text>\n";
  }
  for (double t : yt) {
    if (t < y_lo - 1e-9 || t > y_hi + 1e-9) continue;
    out << "<line x1=\"" << ml << "\" y1=\"" << fmt(py(t)) << "\" x2=\""
        << w - mr << "\" y2=\"" << fmt(py(t))
        << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << fmt(py(t) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt(t) << "</text>\n";
  }
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr
      << "\" height=\"" << h - mt - mb
      << "\" fill=\"none\" stroke=\"#404040\"/>\n";

  for (const auto& s : spec.series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.6\" points=\"";
    for (const auto& [x, y] : s.points)
      out << fmt(px(x)) << "," << fmt(py(y)) << " ";
    out << "\"/>\n";
  }
  double ly = mt + 14;
  for (const auto& s : spec.series) {
    out << "<line x1=\"" << ml + 10 << "\" y1=\"" << ly - 4 << "\" x2=\""
        << ml + 34 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << ml + 40 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label
        << "</text>\n";
    ly += 16;
  }
  out << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">"
      << spec.x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << (mt + h - mb) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 16 "
      << (mt + h - mb) / 2 << ")\">" << spec.y_label << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

void write_svg_plot(const std::string& path, const PlotSpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << render_svg_plot(spec);
}

}  // namespace slas
