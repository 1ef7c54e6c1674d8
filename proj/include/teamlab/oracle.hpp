#pragma once

// Exact and closed-form checks for the signal games: an enumerated joint
// model with value iteration and policy evaluation, the teammate-in-reward
// probability, the team-reward variance curve and the Gaussian entropy.

#include <cstddef>
#include <span>
#include <vector>

#include "teamlab/core.hpp"
#include "teamlab/envs.hpp"
#include "teamlab/learners.hpp"
#include "teamlab/random.hpp"

namespace teamlab {

/// Enumerated joint MDP of a single-team signal game with n agents.
///
/// Joint state index = c * k^n + sum_i cell_i * k^i, joint action index =
/// sum_i a_i * A^i (agent 0 is the least significant digit). The reward of a
/// transition is the team reward, identical for every agent.
class JointModel {
 public:
  struct Outcome {
    std::size_t next = 0;
    double prob = 0.0;
    double team_reward = 0.0;
  };

  JointModel(const SignalGame& game);

  const SignalGame& game() const { return game_; }
  int team_size() const { return n_; }
  int cells() const { return k_; }
  int individual_actions() const { return a_; }
  std::size_t num_states() const { return configs_ * 2; }
  std::size_t num_joint_actions() const { return joint_actions_; }

  JointState decode_state(std::size_t index) const;
  std::size_t encode_state(const JointState& state) const;
  JointAction decode_action(std::size_t index) const;
  std::size_t encode_action(const JointAction& action) const;

  /// Every landing outcome with non-zero probability.
  std::vector<Outcome> outcomes(std::size_t state, std::size_t action) const;
  /// Next-state distribution, aggregated over outcomes.
  std::vector<std::pair<std::size_t, double>> transition_row(std::size_t state,
                                                             std::size_t action) const;

  /// Q(s, a) for every state and joint action at once:
  /// Q = sum_l p(l | s, a) * (TR(l, c) + discount * h(next(l, c))).
  /// Result is indexed state * num_joint_actions() + action.
  void backup(std::span<const double> h, double discount, std::vector<double>& q) const;

 private:
  SignalGame game_;
  int n_;
  int k_;
  int a_;
  std::size_t configs_;        // k^n
  std::size_t joint_actions_;  // A^n
  std::size_t pair_space_;     // (k * A)^n
  std::vector<double> kernel_;              // [(cell * A + a) * k + landed]
  std::vector<std::size_t> next_[2];        // per landed config, per pre-move signal
  std::vector<double> reward_[2];
  std::vector<std::size_t> state_base_;     // per config: sum cell_i * A * (kA)^i
  std::vector<std::size_t> action_offset_;  // per joint action: sum a_i * (kA)^i
  mutable std::vector<double> buf_a_, buf_b_;
};

/// Caps: TwoStates n <= 8, FourStates n <= 4. Throws CapacityError above.
JointModel build_joint_model(SignalLayout layout, int n, double reward_r = 1.0,
                             double slip_prob = 0.1);

enum class Criterion { kDiscounted, kAverage };

struct SolveOptions {
  Criterion criterion = Criterion::kAverage;
  double gamma = 0.9;        // discounted mode only
  double tolerance = 1e-11;  // sup-norm change (discounted) or span (average)
  double tau = 0.5;          // aperiodicity transform weight (average mode)
  std::size_t max_iterations = 1'000'000;
};

struct JointSolution {
  Criterion criterion = Criterion::kAverage;
  /// Discounted values, or relative values (bias) in average mode.
  std::vector<double> values;
  /// Optimal long-run average team reward (average mode).
  double gain = 0.0;
  /// Gain of the extracted policy from every start state (average mode).
  std::vector<double> state_gain;
  /// Greedy joint action per joint state.
  std::vector<std::size_t> policy;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Value iteration (discounted) or relative value iteration on the
/// aperiodicity-transformed model (average). Throws ConvergenceError when the
/// iteration cap is hit and DomainError for gamma outside (0, 1).
JointSolution value_iterate(const JointModel& model, const SolveOptions& options = {});

/// Long-run average team reward of a deterministic joint policy from every
/// start state (handles multichain policies).
std::vector<double> evaluate_average_gain(const JointModel& model,
                                          std::span<const std::size_t> policy,
                                          double tolerance = 1e-12,
                                          std::size_t max_iterations = 1'000'000);

/// Joint policy in which agent i plays per_agent[i][cell_i]; the signal is
/// not observed.
std::vector<std::size_t> joint_policy_from_individual(
    const JointModel& model, const std::vector<std::vector<int>>& per_agent);

struct Cycle {
  std::vector<std::size_t> states;  // recurrent states in visiting order
  double gain = 0.0;                // mean team reward around the cycle
};

/// Recurrent cycle reached from `start` under a deterministic policy in a
/// deterministic model. Throws std::invalid_argument on stochastic dynamics.
Cycle deterministic_cycle(const JointModel& model, std::span<const std::size_t> policy,
                          std::size_t start);

/// All deterministic stationary joint policies whose gain equals
/// `optimal_gain` (within tolerance) from every start state. TwoStates n = 2
/// only; throws ConfigError otherwise.
std::vector<std::vector<std::size_t>> enumerate_optimal_joint_policies(
    const JointModel& model, double optimal_gain, double tolerance = 1e-9);

/// True when some policy in `set` plays `actions[j]` in `states[j]` for all j.
bool contains_behaviour(const std::vector<std::vector<std::size_t>>& set,
                        std::span<const std::size_t> states,
                        std::span<const std::size_t> actions);

/// Probability that at least one of n-1 teammates is in the reward state when
/// each is elsewhere with probability zeta: 1 - zeta^(n-1).
double theorem1_probability(double zeta, int n);

/// Stationary distribution of one agent's cell chain under `policy`.
std::vector<double> per_agent_stationary(const SignalGame& game,
                                         const StationaryPolicy& policy);

/// 1 - stationary occupancy of s_r under the uniform policy.
double stationary_zeta(const SignalGame& game);

struct TeammateEstimate {
  int team_size = 0;
  std::size_t events = 0;
  double probability = 0.0;  // some teammate lands on s_r
  double std_error = 0.0;
  double reward_bearing = 0.0;  // some teammate lands on s_r while c = 1
  double reward_bearing_se = 0.0;
};

/// Monte Carlo over steps in which agent 0 lands on s_c, under uniform
/// policies in a single team of size n. Runs until `min_events` such steps.
TeammateEstimate mc_teammate_in_reward_state(SignalLayout layout, int n,
                                             std::size_t min_events, Rng& rng,
                                             double reward_r = 1.0,
                                             double slip_prob = 0.1);

struct VariancePoint {
  int team_size = 0;
  std::size_t events = 0;
  double mean = 0.0;      // mean TR of agent 0 on steps it lands on s_c
  double variance = 0.0;  // unbiased sample variance of that TR
  double mean_se = 0.0;
  double env_mean = 0.0;      // mean per-agent environmental reward
  double env_variance = 0.0;  // its variance
  double iid_oracle = 0.0;    // env_variance / n
  double sqrt_oracle = 0.0;   // env_variance / sqrt(n)
};

/// Team-reward statistics at s_c landings for each team size (ascending).
std::vector<VariancePoint> team_reward_variance_curve(SignalLayout layout,
                                                      std::span<const int> sizes,
                                                      std::size_t events_per_size,
                                                      Rng& rng, double reward_r = 1.0,
                                                      double slip_prob = 0.1);

/// Differential entropy of N(., variance): 0.5 * ln(2 pi variance) + 0.5.
double gaussian_reward_entropy(double variance);

}  // namespace teamlab
