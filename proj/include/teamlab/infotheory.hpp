#pragma once

// Empirical information-sparsity diagnostics: per-pair information gain
// (KL between return distributions), its expectation and variance under the
// behaviour visitation, the team-reward entropy, the sparsity classification
// and the team-size rule built on top of them. Natural logarithms throughout.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "teamlab/core.hpp"
#include "teamlab/envs.hpp"
#include "teamlab/learners.hpp"
#include "teamlab/random.hpp"

namespace teamlab {

/// Uniform-width bins centred on origin + k * width.
class ReturnBinning {
 public:
  explicit ReturnBinning(double width, double origin = 0.0);

  double width() const { return width_; }
  double origin() const { return origin_; }
  std::int64_t bin_of(double value) const;
  double center(std::int64_t bin) const { return origin_ + width_ * static_cast<double>(bin); }

 private:
  double width_;
  double origin_;
};

struct ReturnSample {
  std::uint32_t rollout = 0;
  int state = 0;
  int action = 0;
  std::int64_t bin = 0;
};

struct RewardSample {
  std::uint32_t rollout = 0;
  std::int64_t bin = 0;
};

/// Raw output of a probe: binned returns per visited (s, a) and binned team
/// rewards per step, tagged by rollout for resampling.
struct ProbeSamples {
  int num_states = 0;
  int num_actions = 0;
  std::uint32_t rollouts = 0;
  ReturnBinning return_binning{1.0};
  ReturnBinning reward_binning{1.0};
  std::vector<ReturnSample> returns;
  std::vector<RewardSample> rewards;
};

/// Binned empirical p(Z | s, a), the behaviour mixture p(Z | s) and the
/// state-action visitation d(s, a).
///
/// The mixture weights are the empirical action frequencies at s, so the
/// mixture coincides with the directly accumulated marginal p(Z | s).
class ReturnDistributionTable {
 public:
  static ReturnDistributionTable build(int num_states, int num_actions,
                                       ReturnBinning binning,
                                       std::span<const ReturnSample> samples,
                                       std::size_t min_samples_per_pair = 1);

  int num_states() const { return states_; }
  int num_actions() const { return actions_; }
  const ReturnBinning& binning() const { return binning_; }
  std::int64_t min_bin() const { return min_bin_; }
  std::size_t bin_count() const { return bins_; }

  std::size_t sample_count(int state, int action) const;
  std::size_t state_count(int state) const;
  std::size_t total_count() const { return total_; }

  /// p(Z | s, a) over the table's bin range. Throws EstimationError when the
  /// pair was never visited.
  std::vector<double> conditional(int state, int action) const;
  /// Sum_a pi(a | s) p(Z | s, a) with the behaviour frequencies pi.
  std::vector<double> mixture(int state) const;
  /// p(Z | s) accumulated directly from the samples.
  std::vector<double> marginal(int state) const;
  double behaviour_prob(int state, int action) const;
  double visitation(int state, int action) const;

  /// Pairs with fewer than the configured minimum number of samples.
  const std::vector<std::pair<int, int>>& insufficient() const { return insufficient_; }

 private:
  std::size_t pair_index(int state, int action) const;

  int states_ = 0;
  int actions_ = 0;
  ReturnBinning binning_{1.0};
  std::int64_t min_bin_ = 0;
  std::size_t bins_ = 0;
  std::size_t total_ = 0;
  std::vector<std::vector<double>> pair_counts_;   // per (s, a)
  std::vector<std::vector<double>> state_counts_;  // per s, accumulated separately
  std::vector<std::size_t> pair_totals_;
  std::vector<std::size_t> state_totals_;
  std::vector<std::pair<int, int>> insufficient_;
};

/// KL( p(Z|s,a) || p(Z|s) ) over the support of p(Z|s,a).
double info_gain(const ReturnDistributionTable& table, int state, int action);

/// Sum over visited (s, a) of d(s, a) * info_gain(s, a).
double expected_info(const ReturnDistributionTable& table);

/// d-weighted variance of the per-pair information gains.
double variance_of_info(const ReturnDistributionTable& table);

/// Shannon entropy of binned team-reward samples. Throws EstimationError with
/// fewer than `min_samples` samples.
double team_reward_entropy(std::span<const double> rewards,
                           const ReturnBinning& binning,
                           std::size_t min_samples = 1);
double team_reward_entropy(std::span<const RewardSample> samples,
                           std::size_t min_samples = 1);

struct SparsityThresholds {
  double epsilon = 1e-3;
  double mu = 1e-4;

  /// Both thresholds must be strictly positive.
  void validate() const;
};

struct InfoReport {
  std::vector<double> pair_info;  // per (s, a), row-major; NaN when unvisited
  double expected_info = 0.0;
  double variance_info = 0.0;
  double tr_entropy = 0.0;
  std::size_t return_samples = 0;
  std::size_t reward_samples = 0;
  std::vector<std::pair<int, int>> insufficient_pairs;
  /// The uniform initial policy stands in for the supremum over initial
  /// policies, and the stationary unconditional team-reward entropy stands in
  /// for the prefix-conditioned one.
  std::vector<std::string> approximations;
};

InfoReport analyze(const ProbeSamples& samples,
                   std::size_t min_samples_per_pair = 1);

enum class Sparsity { kSparse, kNotSparse };

struct SparsityVerdict {
  Sparsity verdict = Sparsity::kSparse;
  double info_margin = 0.0;      // expected_info - epsilon
  double variance_margin = 0.0;  // variance_info - mu
};

/// Sparse when expected_info <= epsilon or variance_info <= mu.
SparsityVerdict classify_sparsity(const InfoReport& report,
                                  const SparsityThresholds& thresholds);

struct ProbeConfig {
  double gamma = 0.9;
  int horizon = 50;
  int rollouts = 64;
  int samples_per_rollout = 200;
  int burn_in = 10;
  double return_bin_width = 1.0 / 128.0;
  /// Team-reward entropy resolution; fixed rather than tied to n.
  double reward_bin_width = 0.5;
  double bin_origin = 0.0;
  std::size_t min_samples_per_pair = 30;
  AgentId designated{0};

  void validate() const;
};

/// Rolls out `policies` (one per agent, or a single policy shared by all) and
/// records, for the designated agent, the H-step discounted team return from
/// every visited (observation, action) and the per-step team reward.
ProbeSamples collect_return_samples(Environment& env, const TeamStructure& teams,
                                    std::span<const StationaryPolicy> policies,
                                    const ProbeConfig& config, Rng& rng);

/// Standard error of expected_info by resampling whole rollouts.
double bootstrap_expected_info_se(const ProbeSamples& samples, int resamples,
                                  Rng& rng);

/// Builds the environment and team structure for team size n.
using TeamSizeFamily =
    std::function<std::pair<std::unique_ptr<Environment>, TeamStructure>(int)>;

/// Single-team signal game of size n (population n).
TeamSizeFamily signal_game_family(SignalLayout layout, double reward_r,
                                  double slip_prob);

struct TeamSizeScan {
  std::vector<int> sizes;
  std::vector<InfoReport> reports;
  std::vector<bool> qualifies;
  std::optional<int> best;  // empty when no candidate qualifies
};

/// Largest candidate n whose estimated expected_info exceeds epsilon and
/// whose variance exceeds mu, both evaluated at uniform initial policies.
TeamSizeScan max_informative_team_size(const TeamSizeFamily& family,
                                       std::span<const int> candidate_sizes,
                                       const SparsityThresholds& thresholds,
                                       const ProbeConfig& config, Rng& rng);

}  // namespace teamlab
