#include "teamlab/core.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "teamlab/errors.hpp"
#include "teamlab/random.hpp"

namespace teamlab {

namespace {

void check_sizes(std::size_t population_size, std::span<const int> sizes) {
  if (sizes.empty()) throw ConfigError("team sizes must not be empty");
  long long total = 0;
  for (int n : sizes) {
    if (n <= 0) {
      throw ConfigError("team size must be positive, got " + std::to_string(n));
    }
    total += n;
  }
  if (total != static_cast<long long>(population_size)) {
    throw ConfigError("team sizes sum to " + std::to_string(total) +
                      " but the population has " +
                      std::to_string(population_size) + " agents");
  }
}

std::vector<std::vector<std::size_t>> blocks(std::span<const std::size_t> order,
                                             std::span<const int> sizes) {
  std::vector<std::vector<std::size_t>> teams;
  std::size_t next = 0;
  for (int n : sizes) {
    std::vector<std::size_t> team(order.begin() + next,
                                  order.begin() + next + n);
    std::sort(team.begin(), team.end());
    teams.push_back(std::move(team));
    next += n;
  }
  return teams;
}

}  // namespace

TeamStructure::TeamStructure(std::vector<std::vector<std::size_t>> teams)
    : teams_(std::move(teams)) {
  std::size_t population = 0;
  for (const auto& t : teams_) population += t.size();
  team_of_.assign(population, 0);
  for (std::size_t k = 0; k < teams_.size(); ++k) {
    for (std::size_t agent : teams_[k]) team_of_[agent] = k;
  }
}

TeamStructure TeamStructure::contiguous(std::size_t population_size,
                                        std::span<const int> team_sizes) {
  check_sizes(population_size, team_sizes);
  std::vector<std::size_t> order(population_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return TeamStructure(blocks(order, team_sizes));
}

TeamStructure TeamStructure::uniform(std::size_t population_size,
                                     int team_size) {
  if (team_size <= 0 || population_size % static_cast<std::size_t>(team_size)) {
    throw ConfigError("team size " + std::to_string(team_size) +
                      " does not divide population " +
                      std::to_string(population_size));
  }
  std::vector<int> sizes(population_size / team_size, team_size);
  return contiguous(population_size, sizes);
}

TeamStructure TeamStructure::shuffled(std::size_t population_size,
                                      std::span<const int> team_sizes,
                                      std::uint64_t seed) {
  check_sizes(population_size, team_sizes);
  std::vector<std::size_t> order(population_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed));
  std::shuffle(order.begin(), order.end(), rng);
  return TeamStructure(blocks(order, team_sizes));
}

std::vector<double> team_reward(std::span<const double> env_rewards,
                                const TeamStructure& teams) {
  if (env_rewards.size() != teams.population()) {
    throw std::invalid_argument("reward vector length does not match population");
  }
  std::vector<double> out(env_rewards.size());
  for (const auto& members : teams.teams()) {
    double sum = 0.0;
    for (std::size_t j : members) sum += env_rewards[j];
    const double mean = sum / static_cast<double>(members.size());
    for (std::size_t j : members) out[j] = mean;
  }
  return out;
}

RewardVector RewardVector::shared(std::vector<double> env_rewards,
                                  const TeamStructure& teams) {
  auto tr = team_reward(env_rewards, teams);
  return {std::move(env_rewards), std::move(tr)};
}

RewardVector RewardVector::shared(std::vector<double> env_rewards,
                                  const TeamStructure& teams,
                                  const SharingRule& rule) {
  auto tr = rule(env_rewards, teams);
  if (tr.size() != env_rewards.size()) {
    throw std::invalid_argument("sharing rule changed the reward vector length");
  }
  return {std::move(env_rewards), std::move(tr)};
}

double discounted_return(std::span<const double> rewards, double gamma,
                         std::size_t start) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw DomainError("discount must lie in (0, 1]");
  }
  if (start > rewards.size()) throw std::out_of_range("start beyond sequence");
  double total = 0.0;
  double weight = 1.0;
  for (std::size_t t = start; t < rewards.size(); ++t) {
    total += weight * rewards[t];
    weight *= gamma;
  }
  return total;
}

TrajectoryLog::TrajectoryLog(double gamma, std::size_t population)
    : gamma_(gamma), population_(population) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw DomainError("discount must lie in (0, 1]");
  }
}

void TrajectoryLog::append(JointState state, JointAction action,
                           RewardVector rewards, JointState next_state) {
  if (population_ == 0) population_ = state.per_agent.size();
  const bool ok = state.per_agent.size() == population_ &&
                  next_state.per_agent.size() == population_ &&
                  action.per_agent.size() == population_ &&
                  rewards.env_rewards.size() == population_ &&
                  rewards.team_rewards.size() == population_;
  if (!ok) throw std::invalid_argument("trajectory step shape mismatch");
  steps_.push_back({std::move(state), std::move(action), std::move(rewards),
                    std::move(next_state)});
}

std::vector<TrajectoryStep> TrajectoryLog::prefix(std::size_t t) const {
  if (t > steps_.size()) throw std::out_of_range("prefix beyond horizon");
  return {steps_.begin(), steps_.begin() + static_cast<std::ptrdiff_t>(t)};
}

std::vector<TrajectoryStep> TrajectoryLog::exclude(std::size_t t) const {
  if (t >= steps_.size()) throw std::out_of_range("excluded step beyond horizon");
  std::vector<TrajectoryStep> out;
  out.reserve(steps_.size() - 1);
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    if (k != t) out.push_back(steps_[k]);
  }
  return out;
}

std::vector<double> TrajectoryLog::team_rewards_of(AgentId agent) const {
  std::vector<double> out;
  out.reserve(steps_.size());
  for (const auto& s : steps_) out.push_back(s.rewards.team_rewards.at(agent.index));
  return out;
}

}  // namespace teamlab
