#include "teamlab/envs.hpp"

#include <stdexcept>
#include <string>

#include "teamlab/errors.hpp"

namespace teamlab {

SignalGame::SignalGame(SignalLayout layout, std::size_t population,
                       double reward_r, double slip_prob)
    : layout_(layout),
      population_(population),
      reward_r_(reward_r),
      slip_prob_(slip_prob) {
  if (population == 0) throw ConfigError("signal game needs at least one agent");
  if (!(reward_r > 0.0)) throw ConfigError("reward_r must be positive");
  if (!(slip_prob >= 0.0 && slip_prob <= 1.0)) {
    throw ConfigError("slip probability must lie in [0, 1]");
  }
}

SignalGame SignalGame::two_states(std::size_t population, double reward_r) {
  return SignalGame(SignalLayout::kTwoStates, population, reward_r, 0.0);
}

SignalGame SignalGame::four_states(std::size_t population, double reward_r,
                                   double slip_prob) {
  return SignalGame(SignalLayout::kFourStates, population, reward_r, slip_prob);
}

int SignalGame::intended(int state, int action) const {
  const int k = num_states();
  if (state < 0 || state >= k) throw std::out_of_range("invalid cell " + std::to_string(state));
  if (action < 0 || action >= k) {
    throw std::out_of_range("invalid action " + std::to_string(action));
  }
  if (layout_ == SignalLayout::kTwoStates) {
    return action == two_states_action::kStay ? state : 1 - state;
  }
  return action;
}

std::vector<double> SignalGame::landing_distribution(int state, int action) const {
  const int target = intended(state, action);
  const int k = num_states();
  std::vector<double> p(k, 0.0);
  if (layout_ == SignalLayout::kTwoStates) {
    p[target] = 1.0;
    return p;
  }
  const double other = slip_prob_ / static_cast<double>(k - 1);
  for (int x = 0; x < k; ++x) p[x] = (x == target) ? 1.0 - slip_prob_ : other;
  return p;
}

int SignalGame::sample_landing(int state, int action, Rng& rng) const {
  const int target = intended(state, action);
  if (layout_ == SignalLayout::kTwoStates || slip_prob_ == 0.0) return target;
  if (uniform01(rng) >= slip_prob_) return target;
  // uniform over the other cells
  int pick = uniform_index(rng, num_states() - 1);
  return pick >= target ? pick + 1 : pick;
}

SignalGame::Transition SignalGame::resolve(const JointState& state,
                                           std::span<const int> landed) const {
  if (landed.size() != population_ || state.per_agent.size() != population_) {
    throw std::invalid_argument("joint state size does not match population");
  }
  const int signal = state.signal.value_or(0);
  Transition out;
  out.env_rewards.assign(population_, 0.0);
  bool occupied = false;
  for (std::size_t i = 0; i < population_; ++i) {
    if (landed[i] == cell::kReward && signal == 1) {
      out.env_rewards[i] = reward_r_;
      out.reward_paid = true;
    }
    occupied = occupied || landed[i] == cell::kSignal;
  }
  int next_signal = signal;
  if (occupied) {
    next_signal = 1;
  } else if (out.reward_paid) {
    next_signal = 0;
  }
  out.next.per_agent.assign(landed.begin(), landed.end());
  out.next.signal = next_signal;
  return out;
}

SignalGame::Transition SignalGame::step(const JointState& state,
                                        const JointAction& action,
                                        Rng& rng) const {
  if (action.per_agent.size() != population_) {
    throw std::invalid_argument("joint action size does not match population");
  }
  std::vector<int> landed(population_);
  for (std::size_t i = 0; i < population_; ++i) {
    landed[i] = sample_landing(state.per_agent.at(i), action.per_agent[i], rng);
  }
  return resolve(state, landed);
}

JointState SignalGame::initial_state(Rng& rng) const {
  JointState s;
  s.per_agent.resize(population_);
  for (auto& x : s.per_agent) x = uniform_index(rng, num_states());
  s.signal = 0;
  return s;
}

// ---------------------------------------------------------------------------

IpdGame::IpdGame(std::size_t population, IpdParams params)
    : population_(population), params_(params) {
  if (population < 2) throw ConfigError("IPD needs at least two agents");
  if (!(params.benefit > params.cost && params.cost > 0.0)) {
    throw ConfigError("IPD requires benefit > cost > 0");
  }
  if (!(params.nu >= 0.0 && params.nu <= 1.0)) {
    throw ConfigError("IPD nu must lie in [0, 1]");
  }
}

std::vector<std::size_t> IpdGame::draw_pairing(const TeamStructure& teams,
                                               Rng& rng) const {
  if (teams.population() != population_) {
    throw std::invalid_argument("team structure does not match IPD population");
  }
  std::vector<std::size_t> pairing(population_);
  for (std::size_t i = 0; i < population_; ++i) {
    const std::size_t team = teams.team_of({i});
    const std::size_t mates = teams.members(team).size() - 1;
    const std::size_t others = population_ - mates - 1;
    bool teammate = uniform01(rng) >= params_.nu;
    if (mates == 0) teammate = false;
    if (others == 0) teammate = true;
    if (teammate) {
      // k-th member of the team, skipping i itself
      auto members = teams.members(team);
      std::size_t k = static_cast<std::size_t>(uniform_index(rng, static_cast<int>(mates)));
      std::size_t pick = members[k];
      if (pick >= i) pick = members[k + 1];
      pairing[i] = pick;
    } else {
      // k-th agent outside the team; members are contiguous only for
      // contiguous structures, so walk the population.
      std::size_t k = static_cast<std::size_t>(uniform_index(rng, static_cast<int>(others)));
      for (std::size_t j = 0; j < population_; ++j) {
        if (teams.team_of({j}) == team) continue;
        if (k-- == 0) {
          pairing[i] = j;
          break;
        }
      }
    }
  }
  return pairing;
}

double IpdGame::payoff(int my_action, int their_action, double cost,
                       double benefit) {
  auto check = [](int a) {
    if (a != ipd_move::kCooperate && a != ipd_move::kDefect) {
      throw std::out_of_range("IPD action must be C or D");
    }
  };
  check(my_action);
  check(their_action);
  return (their_action == ipd_move::kCooperate ? benefit : 0.0) -
         (my_action == ipd_move::kCooperate ? cost : 0.0);
}

std::vector<double> IpdGame::donation_rewards(std::span<const std::size_t> pairing,
                                              std::span<const int> actions) const {
  if (pairing.size() != population_ || actions.size() != population_) {
    throw std::invalid_argument("IPD round shape mismatch");
  }
  std::vector<double> rewards(population_, 0.0);
  for (std::size_t i = 0; i < population_; ++i) {
    if (actions[i] == ipd_move::kCooperate) {
      rewards[i] -= params_.cost;
      rewards[pairing[i]] += params_.benefit;
    } else if (actions[i] != ipd_move::kDefect) {
      throw std::out_of_range("IPD action must be C or D");
    }
  }
  return rewards;
}

IpdGame::Round IpdGame::round(const TeamStructure& teams, const Policy& policy,
                              Rng& rng) const {
  Round out;
  out.pairing = draw_pairing(teams, rng);
  out.observations.resize(population_);
  out.actions.resize(population_);
  for (std::size_t i = 0; i < population_; ++i) {
    out.observations[i] = static_cast<int>(teams.team_of({out.pairing[i]}));
    out.actions[i] = policy({i}, out.observations[i]);
  }
  out.rewards = RewardVector::shared(donation_rewards(out.pairing, out.actions), teams);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

class SignalEnvironment final : public Environment {
 public:
  explicit SignalEnvironment(SignalGame game) : game_(std::move(game)) {}

  std::size_t population() const override { return game_.population(); }
  int num_observations() const override { return game_.num_states(); }
  int num_actions() const override { return game_.num_actions(); }
  void reset(Rng& rng) override { state_ = game_.initial_state(rng); }
  int observe(AgentId agent) const override { return state_.per_agent.at(agent.index); }
  int location(AgentId agent) const override { return observe(agent); }
  std::string_view name() const override {
    return game_.layout() == SignalLayout::kTwoStates ? "twostates" : "fourstates";
  }

  std::vector<double> step(std::span<const int> actions, Rng& rng) override {
    const std::size_t n = game_.population();
    landed_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      landed_[i] = game_.sample_landing(state_.per_agent[i], actions[i], rng);
    }
    auto tr = game_.resolve(state_, landed_);
    state_ = std::move(tr.next);
    return std::move(tr.env_rewards);
  }

 private:
  SignalGame game_;
  JointState state_;
  std::vector<int> landed_;
};

class IpdEnvironment final : public Environment {
 public:
  IpdEnvironment(IpdGame game, TeamStructure teams)
      : game_(std::move(game)), teams_(std::move(teams)) {}

  std::size_t population() const override { return game_.population(); }
  int num_observations() const override { return static_cast<int>(teams_.team_count()); }
  int num_actions() const override { return 2; }
  void reset(Rng& rng) override { pairing_ = game_.draw_pairing(teams_, rng); }
  int observe(AgentId agent) const override {
    return static_cast<int>(teams_.team_of({pairing_.at(agent.index)}));
  }
  int location(AgentId) const override { return -1; }
  std::string_view name() const override { return "ipd"; }

  std::vector<double> step(std::span<const int> actions, Rng& rng) override {
    auto rewards = game_.donation_rewards(pairing_, actions);
    pairing_ = game_.draw_pairing(teams_, rng);
    return rewards;
  }

 private:
  IpdGame game_;
  TeamStructure teams_;
  std::vector<std::size_t> pairing_;
};

}  // namespace

std::unique_ptr<Environment> make_environment(const SignalGame& game) {
  return std::make_unique<SignalEnvironment>(game);
}

std::unique_ptr<Environment> make_environment(const IpdGame& game,
                                              const TeamStructure& teams) {
  if (teams.population() != game.population()) {
    throw ConfigError("team structure does not match IPD population");
  }
  return std::make_unique<IpdEnvironment>(game, teams);
}

}  // namespace teamlab
