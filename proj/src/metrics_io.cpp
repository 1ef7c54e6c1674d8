#include "teamlab/metrics_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "teamlab/errors.hpp"

namespace teamlab {

void MetricsTable::add(int trial, int team_size, std::int64_t checkpoint,
                       std::string metric, double value) {
  rows.push_back({trial, team_size, checkpoint, std::move(metric), value});
}

std::vector<MetricsRow> MetricsTable::select(std::string_view metric, int team_size) const {
  std::vector<MetricsRow> out;
  for (const auto& r : rows) {
    if (r.metric == metric && r.team_size == team_size) out.push_back(r);
  }
  return out;
}

std::string format_value(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string to_csv(const MetricsTable& table) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : table.rows) {
    if (r.metric.find_first_of(",\n\r\"") != std::string::npos) {
      throw std::invalid_argument("metric name '" + r.metric + "' cannot be written to CSV");
    }
    out += std::to_string(r.trial);
    out += ',';
    out += std::to_string(r.team_size);
    out += ',';
    out += std::to_string(r.checkpoint);
    out += ',';
    out += r.metric;
    out += ',';
    out += format_value(r.value);
    out += '\n';
  }
  return out;
}

namespace {

template <typename T>
T field(std::string_view s, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::invalid_argument("csv line " + std::to_string(line) + ": bad field '" +
                                std::string(s) + "'");
  }
  return v;
}

}  // namespace

MetricsTable parse_csv(std::string_view text) {
  MetricsTable table;
  std::size_t line_no = 0;
  bool header = true;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (header) {
      if (line != kCsvHeader) throw std::invalid_argument("csv header mismatch");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::string_view parts[5];
    for (int i = 0; i < 4; ++i) {
      auto c = line.find(',');
      if (c == std::string_view::npos) {
        throw std::invalid_argument("csv line " + std::to_string(line_no) + ": too few fields");
      }
      parts[i] = line.substr(0, c);
      line.remove_prefix(c + 1);
    }
    parts[4] = line;
    MetricsRow row;
    row.trial = field<int>(parts[0], line_no);
    row.team_size = field<int>(parts[1], line_no);
    row.checkpoint = field<std::int64_t>(parts[2], line_no);
    row.metric = std::string(parts[3]);
    if (parts[4] == "nan") row.value = std::nan("");
    else if (parts[4] == "inf") row.value = INFINITY;
    else if (parts[4] == "-inf") row.value = -INFINITY;
    else row.value = field<double>(parts[4], line_no);
    table.rows.push_back(std::move(row));
  }
  if (header) throw std::invalid_argument("csv document is empty");
  return table;
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_csv(const MetricsTable& table, const std::string& path) {
  write_text(to_csv(table), path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace teamlab
