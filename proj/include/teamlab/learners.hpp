#pragma once

// Independent tabular Q-learners with epsilon-greedy exploration.

#include <cstddef>
#include <span>
#include <vector>

#include "teamlab/random.hpp"

namespace teamlab {

struct LearnerConfig {
  double gamma = 0.9;
  double alpha = 0.1;
  double epsilon = 0.3;

  /// Throws ConfigError unless gamma in (0,1), alpha in (0,1], epsilon in [0,1].
  void validate() const;
};

/// Dense Q(s, a) table, zero-initialised.
class QTable {
 public:
  QTable(int num_states, int num_actions);

  int num_states() const { return states_; }
  int num_actions() const { return actions_; }

  double at(int state, int action) const;
  void set(int state, int action, double value);
  std::span<const double> row(int state) const;
  double max_value(int state) const;
  double min_value(int state) const;
  /// Largest |Q| over the whole table.
  double max_abs() const;

  /// Multiplies every entry; used by invariance tests.
  void scale(double factor);

 private:
  std::size_t index(int state, int action) const;

  int states_;
  int actions_;
  std::vector<double> values_;
};

/// One-step Q-learning: Q(s,a) += alpha * (reward + gamma * max Q(s',.) - Q(s,a)).
/// `reward` is the team reward of the acting agent.
void q_update(QTable& table, int state, int action, double reward,
              int next_state, const LearnerConfig& cfg);

/// Epsilon-greedy with uniform tie-breaking among maximisers.
int select_action(const QTable& table, int state, double epsilon, Rng& rng);

/// Greedy action with uniform tie-breaking.
int greedy_action(const QTable& table, int state, Rng& rng);

/// Stationary stochastic policy pi(a | s).
class StationaryPolicy {
 public:
  StationaryPolicy(int num_states, int num_actions, std::vector<double> probs);

  int num_states() const { return states_; }
  int num_actions() const { return actions_; }
  double prob(int state, int action) const;
  std::span<const double> row(int state) const;
  int sample(int state, Rng& rng) const;

 private:
  int states_;
  int actions_;
  std::vector<double> probs_;
};

/// 1/action_count for every action in every state.
StationaryPolicy uniform_random_policy(int num_states, int action_count);

/// Visitation-weighted mean over states of the Shannon entropy (nats) of the
/// empirical action frequencies. `action_counts` is states x actions,
/// row-major. When `state_weights` is empty the weights are the per-state
/// visit totals. Throws EstimationError when every count is zero.
double empirical_policy_entropy(std::span<const double> action_counts,
                                int num_actions,
                                std::span<const double> state_weights = {});

}  // namespace teamlab
