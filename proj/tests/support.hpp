#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace testsupport {

// Master seed for the property suites; ctest runs them under several values.
inline std::uint64_t master_seed() {
  if (const char* s = std::getenv("TEAMLAB_SEED")) return std::strtoull(s, nullptr, 10);
  return 1;
}

inline double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// -sum p ln p written out directly, independent of the library code
inline double entropy_of(std::span<const double> p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0) h -= x * std::log(x);
  return h;
}

inline double l1(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

}  // namespace testsupport
