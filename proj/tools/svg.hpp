#pragma once

#include <string>
#include <vector>

namespace raman::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Minimal line plot: axes with five ticks each, one polyline per series and
/// a legend. Non-finite points (and non-positive ones on log axes) are skipped.
std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace raman::cli
