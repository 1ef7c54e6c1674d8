#include "teamlab/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "teamlab/errors.hpp"
#include "teamlab/stats.hpp"

namespace teamlab {

ReturnBinning::ReturnBinning(double width, double origin)
    : width_(width), origin_(origin) {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw ConfigError("bin width must be positive");
  }
}

std::int64_t ReturnBinning::bin_of(double value) const {
  if (!std::isfinite(value)) throw EstimationError("non-finite value cannot be binned");
  return static_cast<std::int64_t>(std::floor((value - origin_) / width_ + 0.5));
}

// ---------------------------------------------------------------------------

ReturnDistributionTable ReturnDistributionTable::build(
    int num_states, int num_actions, ReturnBinning binning,
    std::span<const ReturnSample> samples, std::size_t min_samples_per_pair) {
  if (num_states <= 0 || num_actions <= 0) {
    throw std::invalid_argument("table dimensions must be positive");
  }
  ReturnDistributionTable t;
  t.states_ = num_states;
  t.actions_ = num_actions;
  t.binning_ = binning;

  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const auto& s : samples) {
    if (s.state < 0 || s.state >= num_states || s.action < 0 || s.action >= num_actions) {
      throw std::out_of_range("return sample outside the table");
    }
    lo = std::min(lo, s.bin);
    hi = std::max(hi, s.bin);
  }
  if (samples.empty()) {
    lo = hi = 0;
  }
  if (hi - lo >= 1'000'000) throw EstimationError("return range too wide for the bin width");
  t.min_bin_ = lo;
  t.bins_ = static_cast<std::size_t>(hi - lo + 1);

  const std::size_t pairs = static_cast<std::size_t>(num_states) * num_actions;
  t.pair_counts_.assign(pairs, std::vector<double>(t.bins_, 0.0));
  t.state_counts_.assign(num_states, std::vector<double>(t.bins_, 0.0));
  t.pair_totals_.assign(pairs, 0);
  t.state_totals_.assign(num_states, 0);
  for (const auto& s : samples) {
    const std::size_t b = static_cast<std::size_t>(s.bin - lo);
    const std::size_t p = t.pair_index(s.state, s.action);
    t.pair_counts_[p][b] += 1.0;
    t.state_counts_[s.state][b] += 1.0;
    ++t.pair_totals_[p];
    ++t.state_totals_[s.state];
  }
  t.total_ = samples.size();
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      if (t.pair_totals_[t.pair_index(s, a)] < min_samples_per_pair) {
        t.insufficient_.emplace_back(s, a);
      }
    }
  }
  return t;
}

std::size_t ReturnDistributionTable::pair_index(int state, int action) const {
  if (state < 0 || state >= states_ || action < 0 || action >= actions_) {
    throw std::out_of_range("state-action pair out of range");
  }
  return static_cast<std::size_t>(state) * actions_ + action;
}

std::size_t ReturnDistributionTable::sample_count(int state, int action) const {
  return pair_totals_[pair_index(state, action)];
}

std::size_t ReturnDistributionTable::state_count(int state) const {
  if (state < 0 || state >= states_) throw std::out_of_range("state out of range");
  return state_totals_[state];
}

std::vector<double> ReturnDistributionTable::conditional(int state, int action) const {
  const std::size_t p = pair_index(state, action);
  if (pair_totals_[p] == 0) {
    throw EstimationError("no return samples for pair (" + std::to_string(state) +
                          ", " + std::to_string(action) + ")");
  }
  std::vector<double> out(pair_counts_[p]);
  const double total = static_cast<double>(pair_totals_[p]);
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> ReturnDistributionTable::mixture(int state) const {
  if (state_count(state) == 0) {
    throw EstimationError("no return samples for state " + std::to_string(state));
  }
  std::vector<double> out(bins_, 0.0);
  for (int a = 0; a < actions_; ++a) {
    const double w = behaviour_prob(state, a);
    if (w == 0.0) continue;
    auto cond = conditional(state, a);
    for (std::size_t b = 0; b < bins_; ++b) out[b] += w * cond[b];
  }
  return out;
}

std::vector<double> ReturnDistributionTable::marginal(int state) const {
  if (state_count(state) == 0) {
    throw EstimationError("no return samples for state " + std::to_string(state));
  }
  std::vector<double> out(state_counts_[state]);
  const double total = static_cast<double>(state_totals_[state]);
  for (double& v : out) v /= total;
  return out;
}

double ReturnDistributionTable::behaviour_prob(int state, int action) const {
  const std::size_t n = state_count(state);
  if (n == 0) return 0.0;
  return static_cast<double>(sample_count(state, action)) / static_cast<double>(n);
}

double ReturnDistributionTable::visitation(int state, int action) const {
  if (total_ == 0) return 0.0;
  return static_cast<double>(sample_count(state, action)) / static_cast<double>(total_);
}

// ---------------------------------------------------------------------------

double info_gain(const ReturnDistributionTable& table, int state, int action) {
  const auto cond = table.conditional(state, action);
  const auto mix = table.mixture(state);
  double kl = 0.0;
  for (std::size_t b = 0; b < cond.size(); ++b) {
    if (cond[b] > 0.0) kl += cond[b] * std::log(cond[b] / mix[b]);
  }
  return kl;
}

namespace {

// (visitation, info) of every visited pair
std::vector<std::pair<double, double>> weighted_infos(const ReturnDistributionTable& t) {
  std::vector<std::pair<double, double>> out;
  for (int s = 0; s < t.num_states(); ++s) {
    for (int a = 0; a < t.num_actions(); ++a) {
      if (t.sample_count(s, a) == 0) continue;
      out.emplace_back(t.visitation(s, a), info_gain(t, s, a));
    }
  }
  return out;
}

double weighted_mean(const std::vector<std::pair<double, double>>& wi) {
  double m = 0.0;
  for (auto [w, i] : wi) m += w * i;
  return m;
}

double weighted_variance(const std::vector<std::pair<double, double>>& wi) {
  const double m = weighted_mean(wi);
  double v = 0.0;
  for (auto [w, i] : wi) v += w * (i - m) * (i - m);
  return v;
}

double entropy_of_bins(std::vector<std::int64_t> bins) {
  std::sort(bins.begin(), bins.end());
  const double n = static_cast<double>(bins.size());
  double h = 0.0;
  for (std::size_t i = 0; i < bins.size();) {
    std::size_t j = i;
    while (j < bins.size() && bins[j] == bins[i]) ++j;
    const double p = static_cast<double>(j - i) / n;
    if (p < 1.0) h -= p * std::log(p);
    i = j;
  }
  return h;
}

}  // namespace

double expected_info(const ReturnDistributionTable& table) {
  return weighted_mean(weighted_infos(table));
}

double variance_of_info(const ReturnDistributionTable& table) {
  return weighted_variance(weighted_infos(table));
}

double team_reward_entropy(std::span<const double> rewards,
                           const ReturnBinning& binning, std::size_t min_samples) {
  if (rewards.empty() || rewards.size() < min_samples) {
    throw EstimationError("too few team-reward samples for an entropy estimate");
  }
  std::vector<std::int64_t> bins;
  bins.reserve(rewards.size());
  for (double r : rewards) bins.push_back(binning.bin_of(r));
  return entropy_of_bins(std::move(bins));
}

double team_reward_entropy(std::span<const RewardSample> samples,
                           std::size_t min_samples) {
  if (samples.empty() || samples.size() < min_samples) {
    throw EstimationError("too few team-reward samples for an entropy estimate");
  }
  std::vector<std::int64_t> bins;
  bins.reserve(samples.size());
  for (const auto& s : samples) bins.push_back(s.bin);
  return entropy_of_bins(std::move(bins));
}

void SparsityThresholds::validate() const {
  if (!(epsilon > 0.0) || !(mu > 0.0)) {
    throw ConfigError("sparsity thresholds epsilon and mu must be positive");
  }
}

InfoReport analyze(const ProbeSamples& samples, std::size_t min_samples_per_pair) {
  auto table = ReturnDistributionTable::build(samples.num_states, samples.num_actions,
                                              samples.return_binning, samples.returns,
                                              min_samples_per_pair);
  InfoReport report;
  report.pair_info.assign(
      static_cast<std::size_t>(samples.num_states) * samples.num_actions,
      std::numeric_limits<double>::quiet_NaN());
  std::vector<std::pair<double, double>> wi;
  for (int s = 0; s < samples.num_states; ++s) {
    for (int a = 0; a < samples.num_actions; ++a) {
      if (table.sample_count(s, a) == 0) continue;
      const double info = info_gain(table, s, a);
      report.pair_info[static_cast<std::size_t>(s) * samples.num_actions + a] = info;
      wi.emplace_back(table.visitation(s, a), info);
    }
  }
  if (wi.empty()) throw EstimationError("probe produced no return samples");
  report.expected_info = weighted_mean(wi);
  report.variance_info = weighted_variance(wi);
  report.tr_entropy = team_reward_entropy(samples.rewards);
  report.return_samples = samples.returns.size();
  report.reward_samples = samples.rewards.size();
  report.insufficient_pairs = table.insufficient();
  report.approximations = {
      "initial-policy supremum evaluated at the supplied (uniform) policy",
      "team-reward entropy is the stationary unconditional entropy"};
  return report;
}

SparsityVerdict classify_sparsity(const InfoReport& report,
                                  const SparsityThresholds& thresholds) {
  thresholds.validate();
  SparsityVerdict v;
  v.info_margin = report.expected_info - thresholds.epsilon;
  v.variance_margin = report.variance_info - thresholds.mu;
  v.verdict = (v.info_margin <= 0.0 || v.variance_margin <= 0.0) ? Sparsity::kSparse
                                                                : Sparsity::kNotSparse;
  return v;
}

void ProbeConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("probe gamma must lie in (0, 1]");
  if (horizon < 1) throw ConfigError("info_horizon must be positive");
  if (rollouts < 1) throw ConfigError("info_rollouts must be positive");
  if (samples_per_rollout < 1) throw ConfigError("samples per rollout must be positive");
  if (burn_in < 0) throw ConfigError("burn-in must be non-negative");
  if (!(return_bin_width > 0.0) || !(reward_bin_width > 0.0)) {
    throw ConfigError("bin_width must be positive");
  }
}

ProbeSamples collect_return_samples(Environment& env, const TeamStructure& teams,
                                    std::span<const StationaryPolicy> policies,
                                    const ProbeConfig& config, Rng& rng) {
  config.validate();
  const std::size_t n = env.population();
  if (teams.population() != n) {
    throw std::invalid_argument("team structure does not match the environment");
  }
  if (policies.size() != 1 && policies.size() != n) {
    throw std::invalid_argument("need one policy, or one per agent");
  }
  for (const auto& p : policies) {
    if (p.num_states() != env.num_observations() || p.num_actions() != env.num_actions()) {
      throw std::invalid_argument("policy shape does not match the environment");
    }
  }
  if (config.designated.index >= n) throw std::out_of_range("designated agent out of range");

  ProbeSamples out;
  out.num_states = env.num_observations();
  out.num_actions = env.num_actions();
  out.rollouts = static_cast<std::uint32_t>(config.rollouts);
  out.return_binning = ReturnBinning(config.return_bin_width, config.bin_origin);
  out.reward_binning = ReturnBinning(config.reward_bin_width, config.bin_origin);

  const auto team = teams.members(teams.team_of(config.designated));
  const double team_n = static_cast<double>(team.size());
  const std::size_t T = static_cast<std::size_t>(config.samples_per_rollout);
  const std::size_t H = static_cast<std::size_t>(config.horizon);
  const std::size_t me = config.designated.index;

  std::vector<int> actions(n);
  std::vector<int> obs(T), act(T);
  std::vector<double> tr(T + H);
  std::vector<double> discount(H);
  for (std::size_t k = 0; k < H; ++k) discount[k] = std::pow(config.gamma, static_cast<double>(k));
  out.returns.reserve(T * config.rollouts);
  out.rewards.reserve(T * config.rollouts);

  auto policy_of = [&](std::size_t i) -> const StationaryPolicy& {
    return policies.size() == 1 ? policies[0] : policies[i];
  };
  auto advance = [&]() {
    for (std::size_t i = 0; i < n; ++i) actions[i] = policy_of(i).sample(env.observe({i}), rng);
    auto env_rewards = env.step(actions, rng);
    double sum = 0.0;
    for (std::size_t j : team) sum += env_rewards[j];
    return sum / team_n;
  };

  for (std::uint32_t r = 0; r < out.rollouts; ++r) {
    env.reset(rng);
    for (int b = 0; b < config.burn_in; ++b) advance();
    for (std::size_t t = 0; t < T + H; ++t) {
      if (t < T) obs[t] = env.observe({me});
      tr[t] = advance();
      if (t < T) act[t] = actions[me];
    }
    for (std::size_t t = 0; t < T; ++t) {
      double z = 0.0;
      for (std::size_t k = 0; k < H; ++k) z += discount[k] * tr[t + k];
      out.returns.push_back({r, obs[t], act[t], out.return_binning.bin_of(z)});
      out.rewards.push_back({r, out.reward_binning.bin_of(tr[t])});
    }
  }
  return out;
}

double bootstrap_expected_info_se(const ProbeSamples& samples, int resamples, Rng& rng) {
  if (resamples < 2) throw std::invalid_argument("bootstrap needs at least two resamples");
  if (samples.rollouts < 2) throw EstimationError("bootstrap needs at least two rollouts");
  std::vector<std::vector<ReturnSample>> by_rollout(samples.rollouts);
  for (const auto& s : samples.returns) by_rollout.at(s.rollout).push_back(s);

  RunningStats stats;
  std::vector<ReturnSample> pooled;
  for (int b = 0; b < resamples; ++b) {
    pooled.clear();
    for (std::uint32_t k = 0; k < samples.rollouts; ++k) {
      const auto& chunk = by_rollout[uniform_index(rng, static_cast<int>(samples.rollouts))];
      pooled.insert(pooled.end(), chunk.begin(), chunk.end());
    }
    auto table = ReturnDistributionTable::build(samples.num_states, samples.num_actions,
                                                samples.return_binning, pooled);
    stats.add(expected_info(table));
  }
  return std::sqrt(stats.variance());
}

TeamSizeFamily signal_game_family(SignalLayout layout, double reward_r, double slip_prob) {
  return [=](int n) {
    if (n < 1) throw ConfigError("team size must be positive");
    const auto pop = static_cast<std::size_t>(n);
    auto game = layout == SignalLayout::kTwoStates
                    ? SignalGame::two_states(pop, reward_r)
                    : SignalGame::four_states(pop, reward_r, slip_prob);
    return std::make_pair(make_environment(game), TeamStructure::uniform(pop, n));
  };
}

TeamSizeScan max_informative_team_size(const TeamSizeFamily& family,
                                       std::span<const int> candidate_sizes,
                                       const SparsityThresholds& thresholds,
                                       const ProbeConfig& config, Rng& rng) {
  thresholds.validate();
  if (!std::is_sorted(candidate_sizes.begin(), candidate_sizes.end())) {
    throw ConfigError("candidate team sizes must be sorted ascending");
  }
  TeamSizeScan scan;
  for (int n : candidate_sizes) {
    auto [env, teams] = family(n);
    const auto policy = uniform_random_policy(env->num_observations(), env->num_actions());
    auto samples = collect_return_samples(*env, teams, std::span(&policy, 1), config, rng);
    auto report = analyze(samples, config.min_samples_per_pair);
    const bool ok = report.expected_info > thresholds.epsilon &&
                    report.variance_info > thresholds.mu;
    scan.sizes.push_back(n);
    scan.reports.push_back(std::move(report));
    scan.qualifies.push_back(ok);
    if (ok) scan.best = n;
  }
  return scan;
}

}  // namespace teamlab
