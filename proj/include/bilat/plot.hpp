#ifndef BILAT_PLOT_HPP_
#define BILAT_PLOT_HPP_

#include <string>
#include <vector>

#include "bilat/types.hpp"

namespace bilat {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotConfig {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 960;
  int height = 440;
};

/// Writes a line plot as a standalone SVG file. Axes are scaled to the
/// data with padded round-number ticks; each series gets a color from a
/// fixed cycle and a legend entry.
void write_svg_plot(const std::vector<PlotSeries>& series, const PlotConfig& cfg,
                    const std::string& path);

}  // namespace bilat

#endif  // BILAT_PLOT_HPP_
