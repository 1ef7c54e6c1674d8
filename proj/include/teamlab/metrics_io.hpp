#pragma once

// Long-form metric rows and their CSV form.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace teamlab {

struct MetricsRow {
  int trial = 0;
  int team_size = 0;
  std::int64_t checkpoint = 0;
  std::string metric;
  double value = 0.0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct MetricsTable {
  std::vector<MetricsRow> rows;

  void add(int trial, int team_size, std::int64_t checkpoint, std::string metric,
           double value);
  /// Rows of one metric for one team size.
  std::vector<MetricsRow> select(std::string_view metric, int team_size) const;

  friend bool operator==(const MetricsTable&, const MetricsTable&) = default;
};

inline constexpr std::string_view kCsvHeader = "trial,team_size,checkpoint,metric,value";

/// Shortest representation that parses back to the same double.
std::string format_value(double value);

std::string to_csv(const MetricsTable& table);
/// Throws std::invalid_argument on a malformed document.
MetricsTable parse_csv(std::string_view text);

/// Throws IoError when the file cannot be written.
void write_csv(const MetricsTable& table, const std::string& path);
void write_text(const std::string& text, const std::string& path);
/// Throws IoError when the file cannot be read.
std::string read_text(const std::string& path);

}  // namespace teamlab
