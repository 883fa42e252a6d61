#include "bilat/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "bilat/model.hpp"

namespace bilat {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range data_range(const std::vector<PlotSeries>& series, bool use_x) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const PlotSeries& s : series) {
    const auto& v = use_x ? s.x : s.y;
    for (double d : v) {
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {lo, hi};
}

double nice_step(double span, int target_ticks) {
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg_plot(const std::vector<PlotSeries>& series, const PlotConfig& cfg,
                    const std::string& path) {
  if (series.empty()) throw UsageError("plot needs at least one series");
  for (const PlotSeries& s : series) {
    if (s.x.size() != s.y.size()) throw UsageError("plot series x/y length mismatch");
    if (s.x.empty()) throw UsageError("plot series is empty");
  }
  const Range xr = data_range(series, true);
  const Range yr = data_range(series, false);

  const int ml = 64, mr = 24, mt = 40, mb = 48;  // margins
  const double pw = cfg.width - ml - mr;
  const double ph = cfg.height - mt - mb;
  auto sx = [&](double x) { return ml + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto sy = [&](double y) { return mt + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ofstream out(path);
  if (!out) throw UsageError("cannot write plot file: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cfg.width << "\" height=\""
      << cfg.height << "\" viewBox=\"0 0 " << cfg.width << " " << cfg.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";

  if (!cfg.title.empty()) {
    out << "<text x=\"" << cfg.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
        << escape_xml(cfg.title) << "</text>\n";
  }

  // Grid and ticks.
  const double xstep = nice_step(xr.hi - xr.lo, 8);
  const double ystep = nice_step(yr.hi - yr.lo, 6);
  for (double x = std::ceil(xr.lo / xstep) * xstep; x <= xr.hi + 1e-9 * xstep; x += xstep) {
    out << "<line x1=\"" << sx(x) << "\" y1=\"" << mt << "\" x2=\"" << sx(x) << "\" y2=\""
        << mt + ph << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<text x=\"" << sx(x) << "\" y=\"" << mt + ph + 16
        << "\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
  }
  for (double y = std::ceil(yr.lo / ystep) * ystep; y <= yr.hi + 1e-9 * ystep; y += ystep) {
    out << "<line x1=\"" << ml << "\" y1=\"" << sy(y) << "\" x2=\"" << ml + pw << "\" y2=\""
        << sy(y) << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << sy(y) + 4
        << "\" text-anchor=\"end\">" << fmt(y) << "</text>\n";
  }
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#404040\"/>\n";

  if (!cfg.x_label.empty()) {
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << cfg.height - 10
        << "\" text-anchor=\"middle\">" << escape_xml(cfg.x_label) << "</text>\n";
  }
  if (!cfg.y_label.empty()) {
    out << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << mt + ph / 2 << ")\">" << escape_xml(cfg.y_label) << "</text>\n";
  }

  const int n_colors = static_cast<int>(sizeof(kColors) / sizeof(kColors[0]));
  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    out << "<polyline fill=\"none\" stroke=\"" << kColors[si % n_colors]
        << "\" stroke-width=\"1.3\" points=\"";
    char buf[48];
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", sx(s.x[i]), sy(s.y[i]));
      out << buf;
    }
    out << "\"/>\n";
  }

  // Legend, top-right inside the frame.
  double ly = mt + 14;
  for (std::size_t si = 0; si < series.size(); ++si) {
    if (series[si].label.empty()) continue;
    const double lx = ml + pw - 150;
    out << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 24 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << kColors[si % n_colors] << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << lx + 30 << "\" y=\"" << ly << "\">" << escape_xml(series[si].label)
        << "</text>\n";
    ly += 16;
  }
  out << "</g>\n</svg>\n";
}

}  // namespace bilat
