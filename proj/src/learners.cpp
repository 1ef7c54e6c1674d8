#include "teamlab/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "teamlab/errors.hpp"

namespace teamlab {

void LearnerConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("epsilon_explore must lie in [0, 1]");
  }
}

QTable::QTable(int num_states, int num_actions)
    : states_(num_states), actions_(num_actions) {
  if (num_states <= 0 || num_actions <= 0) {
    throw std::invalid_argument("Q-table dimensions must be positive");
  }
  values_.assign(static_cast<std::size_t>(num_states) * num_actions, 0.0);
}

std::size_t QTable::index(int state, int action) const {
  if (state < 0 || state >= states_ || action < 0 || action >= actions_) {
    throw std::out_of_range("Q-table index (" + std::to_string(state) + ", " +
                            std::to_string(action) + ") out of range");
  }
  return static_cast<std::size_t>(state) * actions_ + action;
}

double QTable::at(int state, int action) const { return values_[index(state, action)]; }

void QTable::set(int state, int action, double value) {
  values_[index(state, action)] = value;
}

std::span<const double> QTable::row(int state) const {
  return std::span<const double>(values_).subspan(index(state, 0), actions_);
}

double QTable::max_value(int state) const {
  auto r = row(state);
  return *std::max_element(r.begin(), r.end());
}

double QTable::min_value(int state) const {
  auto r = row(state);
  return *std::min_element(r.begin(), r.end());
}

double QTable::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void QTable::scale(double factor) {
  for (double& v : values_) v *= factor;
}

void q_update(QTable& table, int state, int action, double reward,
              int next_state, const LearnerConfig& cfg) {
  const double target = reward + cfg.gamma * table.max_value(next_state);
  const double q = table.at(state, action);
  table.set(state, action, q + cfg.alpha * (target - q));
}

int greedy_action(const QTable& table, int state, Rng& rng) {
  auto r = table.row(state);
  const double best = *std::max_element(r.begin(), r.end());
  int ties = 0;
  for (double v : r) ties += (v == best);
  int pick = ties == 1 ? 0 : uniform_index(rng, ties);
  for (int a = 0; a < table.num_actions(); ++a) {
    if (r[a] == best && pick-- == 0) return a;
  }
  return 0;  // unreachable
}

int select_action(const QTable& table, int state, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && uniform01(rng) < epsilon) {
    return uniform_index(rng, table.num_actions());
  }
  return greedy_action(table, state, rng);
}

StationaryPolicy::StationaryPolicy(int num_states, int num_actions,
                                   std::vector<double> probs)
    : states_(num_states), actions_(num_actions), probs_(std::move(probs)) {
  if (num_states <= 0 || num_actions <= 0 ||
      probs_.size() != static_cast<std::size_t>(num_states) * num_actions) {
    throw std::invalid_argument("policy table has the wrong shape");
  }
  for (int s = 0; s < states_; ++s) {
    auto r = row(s);
    double total = std::accumulate(r.begin(), r.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9 ||
        std::any_of(r.begin(), r.end(), [](double p) { return p < 0.0; })) {
      throw std::invalid_argument("policy row is not a distribution");
    }
  }
}

double StationaryPolicy::prob(int state, int action) const {
  return probs_.at(static_cast<std::size_t>(state) * actions_ + action);
}

std::span<const double> StationaryPolicy::row(int state) const {
  if (state < 0 || state >= states_) throw std::out_of_range("policy state out of range");
  return std::span<const double>(probs_).subspan(
      static_cast<std::size_t>(state) * actions_, actions_);
}

int StationaryPolicy::sample(int state, Rng& rng) const {
  auto r = row(state);
  double u = uniform01(rng);
  for (int a = 0; a < actions_ - 1; ++a) {
    if (u < r[a]) return a;
    u -= r[a];
  }
  return actions_ - 1;
}

StationaryPolicy uniform_random_policy(int num_states, int action_count) {
  if (action_count < 1) throw std::invalid_argument("need at least one action");
  return StationaryPolicy(
      num_states, action_count,
      std::vector<double>(static_cast<std::size_t>(num_states) * action_count,
                          1.0 / action_count));
}

double empirical_policy_entropy(std::span<const double> action_counts,
                                int num_actions,
                                std::span<const double> state_weights) {
  if (num_actions <= 0 || action_counts.size() % num_actions != 0) {
    throw std::invalid_argument("action count table has the wrong shape");
  }
  const std::size_t states = action_counts.size() / num_actions;
  if (!state_weights.empty() && state_weights.size() != states) {
    throw std::invalid_argument("one weight per state expected");
  }
  double weighted = 0.0;
  double weight_total = 0.0;
  for (std::size_t s = 0; s < states; ++s) {
    auto row = action_counts.subspan(s * num_actions, num_actions);
    double total = 0.0;
    for (double c : row) {
      if (c < 0.0) throw std::invalid_argument("negative action count");
      total += c;
    }
    if (total == 0.0) continue;
    double h = 0.0;
    for (double c : row) {
      if (c > 0.0) {
        const double p = c / total;
        h -= p * std::log(p);
      }
    }
    const double w = state_weights.empty() ? total : state_weights[s];
    weighted += w * h;
    weight_total += w;
  }
  if (weight_total <= 0.0) {
    throw EstimationError("policy entropy needs at least one visited state");
  }
  return weighted / weight_total;
}

}  // namespace teamlab
