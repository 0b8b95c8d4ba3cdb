#include "relpose/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "relpose/errors.hpp"

namespace relpose {
namespace {

// Chart geometry in pixels.
constexpr double kWidth = 880.0;
constexpr double kHeight = 460.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 700.0;  // legend sits to the right of this edge
constexpr double kTop = 46.0;
constexpr double kBottom = 408.0;

constexpr const char* kPalette[] = {"#1b6ca8", "#d1495b", "#2e933c",
                                    "#ff8c42", "#6a4c93", "#3a3a3a"};
constexpr int kPaletteSize = 6;

std::string escape_xml(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    switch (ch) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += ch;
    }
  }
  return out;
}

std::string fmt(double value, const char* spec = "%.2f") {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), spec, value);
  return buffer;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range span(const std::vector<PlotSeries>& series, bool horizontal) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const PlotSeries& s : series) {
    for (double v : horizontal ? s.x : s.y) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) {
    // Flat data: open a symmetric window so the line sits mid-chart.
    const double pad = std::max(1.0, std::abs(lo) * 0.1);
    return {lo - pad, lo + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

// Tick spacing of roughly range/target rounded to a 1/2/5 decade.
double nice_step(double range, int target) {
  const double raw = range / target;
  const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
  const double mantissa = raw / magnitude;
  if (mantissa <= 1.5) {
    return magnitude;
  }
  if (mantissa <= 3.5) {
    return 2.0 * magnitude;
  }
  if (mantissa <= 7.5) {
    return 5.0 * magnitude;
  }
  return 10.0 * magnitude;
}

}  // namespace

std::string render_line_chart(const std::string& title,
                              const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<PlotSeries>& series) {
  if (series.empty()) {
    throw std::invalid_argument("render_line_chart: no series");
  }
  for (const PlotSeries& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size()) {
      throw std::invalid_argument(
          "render_line_chart: series \"" + s.label +
          "\" needs equal, nonempty x and y");
    }
  }

  const Range xr = span(series, true);
  const Range yr = span(series, false);
  const auto px = [&xr](double x) {
    return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kRight - kLeft);
  };
  const auto py = [&yr](double y) {
    return kBottom - (y - yr.lo) / (yr.hi - yr.lo) * (kBottom - kTop);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         fmt(kWidth, "%.0f") + "\" height=\"" + fmt(kHeight, "%.0f") +
         "\" viewBox=\"0 0 " + fmt(kWidth, "%.0f") + " " +
         fmt(kHeight, "%.0f") + "\" font-family=\"sans-serif\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt((kLeft + kRight) / 2) + "\" y=\"24\" " +
         "text-anchor=\"middle\" font-size=\"16\">" + escape_xml(title) +
         "</text>\n";

  // Grid and ticks.
  const double x_step = nice_step(xr.hi - xr.lo, 6);
  for (double x = std::ceil(xr.lo / x_step) * x_step; x <= xr.hi;
       x += x_step) {
    const double p = px(x);
    svg += "<line x1=\"" + fmt(p) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" +
           fmt(p) + "\" y2=\"" + fmt(kBottom) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + fmt(p) + "\" y=\"" + fmt(kBottom + 18.0) +
           "\" text-anchor=\"middle\" font-size=\"11\">" +
           escape_xml(fmt(x, "%.6g")) + "</text>\n";
  }
  const double y_step = nice_step(yr.hi - yr.lo, 6);
  for (double y = std::ceil(yr.lo / y_step) * y_step; y <= yr.hi;
       y += y_step) {
    const double p = py(y);
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(p) + "\" x2=\"" +
           fmt(kRight) + "\" y2=\"" + fmt(p) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + fmt(kLeft - 8.0) + "\" y=\"" + fmt(p + 4.0) +
           "\" text-anchor=\"end\" font-size=\"11\">" +
           escape_xml(fmt(y, "%.6g")) + "</text>\n";
  }

  // Axes frame.
  svg += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" +
         fmt(kRight - kLeft) + "\" height=\"" + fmt(kBottom - kTop) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + fmt((kLeft + kRight) / 2) + "\" y=\"" +
         fmt(kHeight - 10.0) + "\" text-anchor=\"middle\" font-size=\"13\">" +
         escape_xml(x_label) + "</text>\n";
  svg += "<text x=\"20\" y=\"" + fmt((kTop + kBottom) / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 "
         "20 " +
         fmt((kTop + kBottom) / 2) + ")\">" + escape_xml(y_label) +
         "</text>\n";

  // Data.
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % kPaletteSize];
    std::string points;
    for (std::size_t k = 0; k < series[i].x.size(); ++k) {
      if (k > 0) {
        points += ' ';
      }
      points += fmt(px(series[i].x[k])) + "," + fmt(py(series[i].y[k]));
    }
    svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" +
           color + "\" stroke-width=\"1.5\"/>\n";
  }

  // Legend.
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % kPaletteSize];
    const double y = kTop + 14.0 + 18.0 * static_cast<double>(i);
    svg += "<line x1=\"" + fmt(kRight + 14.0) + "\" y1=\"" + fmt(y) +
           "\" x2=\"" + fmt(kRight + 38.0) + "\" y2=\"" + fmt(y) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(kRight + 44.0) + "\" y=\"" + fmt(y + 4.0) +
           "\" font-size=\"12\">" + escape_xml(series[i].label) + "</text>\n";
  }

  svg += "</svg>\n";
  return svg;
}

std::vector<std::string> emit_plots(const RunResult& result,
                                    const std::string& out_dir) {
  if (result.records.empty()) {
    throw std::invalid_argument("emit_plots: no records");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError(out_dir + ": cannot create output directory (" +
                  ec.message() + ")");
  }

  std::vector<double> t;
  t.reserve(result.records.size() + 1);
  t.push_back(result.initial.t);
  for (const RunRecord& record : result.records) {
    t.push_back(record.t);
  }
  const auto channel = [&](auto&& pick) {
    std::vector<double> values;
    values.reserve(t.size());
    values.push_back(pick(result.initial));
    for (const RunRecord& record : result.records) {
      values.push_back(pick(record));
    }
    return values;
  };

  const std::vector<PlotSeries> attitude = {
      {"principal angle", t,
       channel([](const RunRecord& r) { return r.error.principal_angle; })}};
  std::vector<PlotSeries> position;
  std::vector<PlotSeries> velocity;
  const char* axes[] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i) {
    position.push_back({std::string("position ") + axes[i] + " [m]", t,
                        channel([i](const RunRecord& r) {
                          return r.error.position[i];
                        })});
  }
  for (int i = 0; i < 3; ++i) {
    velocity.push_back({std::string("angular ") + axes[i] + " [rad/s]", t,
                        channel([i](const RunRecord& r) {
                          return r.error.omega[i];
                        })});
  }
  for (int i = 0; i < 3; ++i) {
    velocity.push_back({std::string("translational ") + axes[i] + " [m/s]", t,
                        channel([i](const RunRecord& r) {
                          return r.error.nu[i];
                        })});
  }

  const struct {
    const char* file;
    const char* title;
    const char* y_label;
    const std::vector<PlotSeries>* series;
  } charts[] = {
      {"attitude_error.svg", "Attitude estimation error",
       "principal angle [rad]", &attitude},
      {"position_error.svg", "Position estimation error", "error [m]",
       &position},
      {"velocity_error.svg", "Velocity estimation error", "error", &velocity},
  };

  std::vector<std::string> paths;
  for (const auto& chart : charts) {
    const std::string path = out_dir + "/" + chart.file;
    std::ofstream file(path);
    if (!file) {
      throw IoError(path + ": cannot open for writing");
    }
    file << render_line_chart(chart.title, "time [s]", chart.y_label,
                              *chart.series);
    if (!file.good()) {
      throw IoError(path + ": write failed");
    }
    paths.push_back(path);
  }
  return paths;
}

}  // namespace relpose
