#pragma once

// The concrete stochastic games: the signal games (TwoStates, FourStates) and
// the team-based donation-game IPD.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "teamlab/core.hpp"
#include "teamlab/random.hpp"

namespace teamlab {

/// Physical state codes shared by both signal games.
namespace cell {
inline constexpr int kSignal = 0;  // s_c
inline constexpr int kReward = 1;  // s_r
inline constexpr int kNoop3 = 2;   // s_3 (FourStates only)
inline constexpr int kNoop4 = 3;   // s_4 (FourStates only)
}  // namespace cell

/// TwoStates action codes. FourStates actions are destination state codes.
namespace two_states_action {
inline constexpr int kStay = 0;
inline constexpr int kMove = 1;
}  // namespace two_states_action

enum class SignalLayout { kTwoStates, kFourStates };

/// Agents move between physical cells; visiting s_c raises a hidden signal
/// that makes s_r pay `reward_r` to every agent landing there.
///
/// Step order: all agents move simultaneously, s_r arrivals are paid using
/// the signal from before the move, then the signal is updated: it becomes 1
/// if any agent occupies s_c, else 0 if a reward was just paid, else it
/// persists.
class SignalGame {
 public:
  static SignalGame two_states(std::size_t population, double reward_r = 1.0);
  static SignalGame four_states(std::size_t population, double reward_r = 1.0,
                                double slip_prob = 0.1);

  SignalLayout layout() const { return layout_; }
  std::size_t population() const { return population_; }
  int num_states() const { return layout_ == SignalLayout::kTwoStates ? 2 : 4; }
  int num_actions() const { return num_states(); }
  double reward_r() const { return reward_r_; }
  double slip_prob() const { return slip_prob_; }

  /// Destination the agent aims for. Throws std::out_of_range on a bad code.
  int intended(int state, int action) const;

  /// P(land on each cell | state, action) for one agent.
  std::vector<double> landing_distribution(int state, int action) const;
  int sample_landing(int state, int action, Rng& rng) const;

  struct Transition {
    JointState next;
    std::vector<double> env_rewards;
    bool reward_paid = false;
  };

  /// Rewards and signal update once every agent's landing cell is known.
  Transition resolve(const JointState& state, std::span<const int> landed) const;

  Transition step(const JointState& state, const JointAction& action,
                  Rng& rng) const;

  /// Uniformly random cells, signal 0.
  JointState initial_state(Rng& rng) const;

 private:
  SignalGame(SignalLayout layout, std::size_t population, double reward_r,
             double slip_prob);

  SignalLayout layout_;
  std::size_t population_;
  double reward_r_;
  double slip_prob_;
};

namespace ipd_move {
inline constexpr int kCooperate = 0;
inline constexpr int kDefect = 1;
}  // namespace ipd_move

struct IpdParams {
  double cost = 1.0;
  double benefit = 5.0;
  double nu = 0.97;  // probability the counterpart is drawn from other teams
};

/// Donation-game IPD with per-agent random counterparts.
///
/// Every agent draws its own counterpart and acts toward it; cooperating costs
/// the actor `cost` and hands the counterpart `benefit`. An agent can be the
/// counterpart of several agents in one round.
class IpdGame {
 public:
  IpdGame(std::size_t population, IpdParams params);

  std::size_t population() const { return population_; }
  const IpdParams& params() const { return params_; }

  /// Counterpart of every agent. With probability 1-nu a teammate (never the
  /// agent itself), otherwise a non-teammate; falls back to whichever group
  /// is non-empty.
  std::vector<std::size_t> draw_pairing(const TeamStructure& teams,
                                        Rng& rng) const;

  /// Payoff of one side of a mutual interaction.
  static double payoff(int my_action, int their_action, double cost,
                       double benefit);

  /// Environmental rewards of one round from the pairing and actions.
  std::vector<double> donation_rewards(std::span<const std::size_t> pairing,
                                       std::span<const int> actions) const;

  struct Round {
    std::vector<std::size_t> pairing;
    std::vector<int> observations;  // counterpart's team index
    std::vector<int> actions;
    RewardVector rewards;
  };

  using Policy = std::function<int(AgentId, int observation)>;

  Round round(const TeamStructure& teams, const Policy& policy, Rng& rng) const;

 private:
  std::size_t population_;
  IpdParams params_;
};

/// Observation-level view of a running game, shared by the learning loop and
/// the information probe.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t population() const = 0;
  virtual int num_observations() const = 0;
  virtual int num_actions() const = 0;
  virtual void reset(Rng& rng) = 0;
  virtual int observe(AgentId agent) const = 0;
  /// Applies the joint action and returns environmental rewards.
  virtual std::vector<double> step(std::span<const int> actions, Rng& rng) = 0;
  /// Physical cell of the agent, or -1 when the game has no positions.
  virtual int location(AgentId agent) const = 0;
  virtual std::string_view name() const = 0;
};

std::unique_ptr<Environment> make_environment(const SignalGame& game);
std::unique_ptr<Environment> make_environment(const IpdGame& game,
                                              const TeamStructure& teams);

}  // namespace teamlab
