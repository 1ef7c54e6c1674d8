#include "teamlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "teamlab/stats.hpp"

namespace teamlab {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const {
    return kLeft + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) *
                                   (kHeight - kTop - kBottom);
  }
};

void pad(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
    return;
  }
  const double m = 0.05 * (hi - lo);
  lo -= m;
  hi += m;
}

void axes(std::ostringstream& out, const Frame& f, const ChartText& text) {
  out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape(text.title) << "</text>\n";
  const double bx = kLeft, by = kHeight - kBottom;
  const double ex = kWidth - kRight, ey = kTop;
  out << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << ex << "\" y2=\"" << by
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << bx << "\" y2=\"" << ey
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    const double y = f.py(yv);
    out << "<line x1=\"" << bx - 4 << "\" y1=\"" << y << "\" x2=\"" << bx << "\" y2=\"" << y
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << bx - 6 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_value(std::round(yv * 1000) / 1000) << "</text>\n";
  }
  out << "<text x=\"" << (bx + ex) / 2 << "\" y=\"" << kHeight - 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape(text.x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << (by + ey) / 2 << "\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
      << (by + ey) / 2 << ")\">" << escape(text.y_label) << "</text>\n";
}

void legend(std::ostringstream& out, std::span<const std::string> labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = kTop + 10 + 20.0 * i;
    const double x = kWidth - kRight + 16;
    out << "<rect x=\"" << x << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"12\" fill=\""
        << kPalette[i % 8] << "\"/>\n";
    out << "<text x=\"" << x + 18 << "\" y=\"" << y + 1
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(labels[i])
        << "</text>\n";
  }
}

}  // namespace

std::string render_line_chart(std::span<const LineSeries> series, const ChartText& text) {
  if (series.empty()) throw std::invalid_argument("line chart needs at least one series");
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    if (s.x.empty() || s.mean.size() != s.x.size() || s.half_width.size() != s.x.size()) {
      throw std::invalid_argument("series '" + s.label + "' is empty or mis-shaped");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.mean[i] - s.half_width[i]);
      y1 = std::max(y1, s.mean[i] + s.half_width[i]);
    }
  }
  pad(y0, y1);
  const Frame f{x0, x1, y0, y1};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  axes(out, f, text);
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % 8];
    labels.push_back(s.label);
    out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << f.px(s.x[i]) << ',' << f.py(s.mean[i] + s.half_width[i]) << ' ';
    }
    for (std::size_t i = s.x.size(); i-- > 0;) {
      out << f.px(s.x[i]) << ',' << f.py(s.mean[i] - s.half_width[i]) << ' ';
    }
    out << "\"/>\n";
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << f.px(s.x[i]) << ',' << f.py(s.mean[i]) << ' ';
    }
    out << "\"/>\n";
  }
  legend(out, labels);
  out << "</svg>\n";
  return out.str();
}

std::string render_bar_chart(std::span<const BarGroup> groups,
                             std::span<const std::string> series_labels,
                             const ChartText& text) {
  if (groups.empty() || series_labels.empty()) {
    throw std::invalid_argument("bar chart needs groups and series");
  }
  double y0 = 0.0, y1 = 0.0;
  for (const auto& g : groups) {
    if (g.values.size() != series_labels.size()) {
      throw std::invalid_argument("group '" + g.label + "' has the wrong number of bars");
    }
    for (double v : g.values) {
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  pad(y0, y1);
  const double G = static_cast<double>(groups.size());
  const Frame f{0.0, G, y0, y1};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  axes(out, f, text);
  const double zero = f.py(0.0);
  out << "<line x1=\"" << kLeft << "\" y1=\"" << zero << "\" x2=\"" << kWidth - kRight
      << "\" y2=\"" << zero << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  const double slot = (f.px(1.0) - f.px(0.0));
  const double bar = 0.8 * slot / static_cast<double>(series_labels.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double left = f.px(static_cast<double>(g)) + 0.1 * slot;
    for (std::size_t k = 0; k < groups[g].values.size(); ++k) {
      const double y = f.py(groups[g].values[k]);
      out << "<rect x=\"" << left + bar * k << "\" y=\"" << std::min(y, zero)
          << "\" width=\"" << bar << "\" height=\"" << std::abs(zero - y) << "\" fill=\""
          << kPalette[k % 8] << "\"/>\n";
    }
    out << "<text x=\"" << left + 0.4 * slot << "\" y=\"" << kHeight - kBottom + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape(groups[g].label) << "</text>\n";
  }
  legend(out, series_labels);
  out << "</svg>\n";
  return out.str();
}

LineSeries band_series(const MetricsTable& table, const std::string& metric, int team_size,
                       std::string label) {
  std::map<std::int64_t, std::vector<double>> by_checkpoint;
  for (const auto& r : table.rows) {
    if (r.metric == metric && r.team_size == team_size) by_checkpoint[r.checkpoint].push_back(r.value);
  }
  LineSeries s;
  s.label = std::move(label);
  for (const auto& [cp, values] : by_checkpoint) {
    s.x.push_back(static_cast<double>(cp));
    s.mean.push_back(summarize(values).mean);
    s.half_width.push_back(values.size() > 1 ? ci95_half_width(values) : 0.0);
  }
  return s;
}

}  // namespace teamlab
