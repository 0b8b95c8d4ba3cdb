#pragma once

#include <string>
#include <vector>

#include "relpose/scenario.hpp"

namespace relpose {

/// One polyline of a line chart.  x and y must be nonempty and equal length.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Renders a static line chart — axes, tick marks, legend — as a standalone
/// SVG document string.
std::string render_line_chart(const std::string& title,
                              const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<PlotSeries>& series);

/// Writes attitude_error.svg, position_error.svg, and velocity_error.svg for
/// a run (the t = 0 sample leads each curve).  Creates out_dir when missing
/// and returns the paths written.
std::vector<std::string> emit_plots(const RunResult& result,
                                    const std::string& out_dir);

}  // namespace relpose
