#pragma once

// Stochastic-game primitives shared by every other module: agents, teams,
// joint states/actions, the team-reward channel and trajectories.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace teamlab {

struct AgentId {
  std::size_t index = 0;
  friend auto operator<=>(const AgentId&, const AgentId&) = default;
};

/// Partition of agents 0..N-1 into disjoint, non-empty teams.
class TeamStructure {
 public:
  /// Contiguous block assignment: sizes {2,2} over 4 agents gives {0,1},{2,3}.
  /// Throws ConfigError when a size is non-positive or the sizes do not sum
  /// to the population.
  static TeamStructure contiguous(std::size_t population_size,
                                  std::span<const int> team_sizes);

  /// Equal-size partition of the population into population/n teams.
  static TeamStructure uniform(std::size_t population_size, int team_size);

  /// Same sizes as contiguous(), but membership drawn from a permutation
  /// seeded independently of any experiment stream.
  static TeamStructure shuffled(std::size_t population_size,
                                std::span<const int> team_sizes,
                                std::uint64_t seed);

  std::size_t population() const { return team_of_.size(); }
  std::size_t team_count() const { return teams_.size(); }
  std::size_t team_of(AgentId agent) const { return team_of_.at(agent.index); }
  std::span<const std::size_t> members(std::size_t team) const {
    return teams_.at(team);
  }
  std::size_t team_size_of(AgentId agent) const {
    return teams_[team_of(agent)].size();
  }
  bool same_team(AgentId a, AgentId b) const {
    return team_of(a) == team_of(b);
  }
  const std::vector<std::vector<std::size_t>>& teams() const { return teams_; }

 private:
  explicit TeamStructure(std::vector<std::vector<std::size_t>> teams);

  std::vector<std::vector<std::size_t>> teams_;
  std::vector<std::size_t> team_of_;
};

/// Per-agent individual states plus the optional binary environment signal.
struct JointState {
  std::vector<int> per_agent;
  std::optional<int> signal;

  friend bool operator==(const JointState&, const JointState&) = default;
};

struct JointAction {
  std::vector<int> per_agent;

  friend bool operator==(const JointAction&, const JointAction&) = default;
};

/// Team reward of every agent: the mean of its team's environmental rewards.
/// The sum is accumulated left to right in member order, then divided by n.
std::vector<double> team_reward(std::span<const double> env_rewards,
                                const TeamStructure& teams);

/// Reward sharing hook. Only the mean rule above is exercised numerically.
using SharingRule = std::function<std::vector<double>(
    std::span<const double>, const TeamStructure&)>;

struct RewardVector {
  std::vector<double> env_rewards;
  std::vector<double> team_rewards;

  static RewardVector shared(std::vector<double> env_rewards,
                             const TeamStructure& teams);
  static RewardVector shared(std::vector<double> env_rewards,
                             const TeamStructure& teams,
                             const SharingRule& rule);
};

/// Sum_{t >= start} gamma^(t - start) * rewards[t].
double discounted_return(std::span<const double> rewards, double gamma,
                         std::size_t start = 0);

struct TrajectoryStep {
  JointState state;
  JointAction action;
  RewardVector rewards;
  JointState next_state;
};

/// Record of one trial's joint experience.
class TrajectoryLog {
 public:
  explicit TrajectoryLog(double gamma, std::size_t population = 0);

  /// Appends (s, a, rewards, s'). Throws std::invalid_argument on a shape
  /// mismatch with the population size.
  void append(JointState state, JointAction action, RewardVector rewards,
              JointState next_state);

  std::size_t horizon() const { return steps_.size(); }
  double gamma() const { return gamma_; }
  const TrajectoryStep& at(std::size_t t) const { return steps_.at(t); }
  const std::vector<TrajectoryStep>& steps() const { return steps_; }

  /// Steps strictly before t (the 1:t-1 prefix in 1-based notation).
  std::vector<TrajectoryStep> prefix(std::size_t t) const;
  /// Every step except step t.
  std::vector<TrajectoryStep> exclude(std::size_t t) const;

  /// Team-reward sequence of one agent.
  std::vector<double> team_rewards_of(AgentId agent) const;

 private:
  double gamma_;
  std::size_t population_;
  std::vector<TrajectoryStep> steps_;
};

}  // namespace teamlab
