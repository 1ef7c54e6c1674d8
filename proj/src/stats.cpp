#include "teamlab/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace teamlab {

Summary summarize(std::span<const double> values) {
  RunningStats rs;
  for (double v : values) rs.add(v);
  return {rs.count(), rs.mean(), rs.variance(), rs.std_error()};
}

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double RunningStats::variance() const {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::std_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

double ci95_half_width(std::span<const double> values) {
  return 1.96 * summarize(values).std_error;
}

std::vector<double> isotonic_non_increasing(std::span<const double> values,
                                            std::span<const double> weights) {
  if (!weights.empty() && weights.size() != values.size()) {
    throw std::invalid_argument("isotonic fit: one weight per value expected");
  }
  struct Block {
    double mean;
    double weight;
    std::size_t length;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < values.size(); ++i) {
    blocks.push_back({values[i], weights.empty() ? 1.0 : weights[i], 1});
    while (blocks.size() > 1 &&
           blocks[blocks.size() - 2].mean < blocks.back().mean) {
      Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      const double w = a.weight + b.weight;
      a.mean = (a.mean * a.weight + b.mean * b.weight) / w;
      a.weight = w;
      a.length += b.length;
    }
  }
  std::vector<double> fit;
  fit.reserve(values.size());
  for (const auto& b : blocks) fit.insert(fit.end(), b.length, b.mean);
  return fit;
}

double chi_square_p_value(double statistic, int degrees_of_freedom) {
  boost::math::chi_squared dist(degrees_of_freedom);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double pearson_statistic(std::span<const double> observed,
                         std::span<const double> expected_probs) {
  if (observed.size() != expected_probs.size()) {
    throw std::invalid_argument("pearson statistic: shape mismatch");
  }
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  double stat = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double e = total * expected_probs[k];
    if (e <= 0.0) continue;
    stat += (observed[k] - e) * (observed[k] - e) / e;
  }
  return stat;
}

}  // namespace teamlab
