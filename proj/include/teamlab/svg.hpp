#pragma once

// Minimal self-contained SVG charts: mean lines with 95% bands, and grouped
// bars.

#include <span>
#include <string>
#include <vector>

#include "teamlab/metrics_io.hpp"

namespace teamlab {

struct LineSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> half_width;  // band is mean +/- half_width
};

struct BarGroup {
  std::string label;             // one group per category (e.g. a state)
  std::vector<double> values;    // one bar per series
};

struct ChartText {
  std::string title;
  std::string x_label;
  std::string y_label;
};

/// Throws std::invalid_argument when series are empty or mis-shaped.
std::string render_line_chart(std::span<const LineSeries> series, const ChartText& text);
std::string render_bar_chart(std::span<const BarGroup> groups,
                             std::span<const std::string> series_labels,
                             const ChartText& text);

/// Mean and 1.96 * SE across trials of one metric, per checkpoint.
LineSeries band_series(const MetricsTable& table, const std::string& metric,
                       int team_size, std::string label);

}  // namespace teamlab
