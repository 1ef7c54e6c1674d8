#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace teamlab {

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased (n - 1) sample variance
  double std_error = 0.0;
};

Summary summarize(std::span<const double> values);

/// Streaming mean/variance (Welford).
class RunningStats {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double std_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Half-width of a normal-approximation 95% interval: 1.96 * SE.
double ci95_half_width(std::span<const double> values);

/// Weighted least-squares non-increasing fit (pool adjacent violators).
std::vector<double> isotonic_non_increasing(std::span<const double> values,
                                            std::span<const double> weights = {});

/// Upper-tail probability of a chi-square statistic.
double chi_square_p_value(double statistic, int degrees_of_freedom);

/// Pearson statistic of observed counts against expected probabilities.
double pearson_statistic(std::span<const double> observed,
                         std::span<const double> expected_probs);

}  // namespace teamlab
