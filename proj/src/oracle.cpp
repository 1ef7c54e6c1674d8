#include "teamlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "teamlab/errors.hpp"
#include "teamlab/stats.hpp"

namespace teamlab {

namespace {

std::size_t ipow(std::size_t base, int exp) {
  std::size_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace

JointModel::JointModel(const SignalGame& game)
    : game_(game),
      n_(static_cast<int>(game.population())),
      k_(game.num_states()),
      a_(game.num_actions()) {
  configs_ = ipow(k_, n_);
  joint_actions_ = ipow(a_, n_);
  const std::size_t m = static_cast<std::size_t>(k_) * a_;
  pair_space_ = ipow(m, n_);

  kernel_.assign(m * k_, 0.0);
  for (int cell = 0; cell < k_; ++cell) {
    for (int a = 0; a < a_; ++a) {
      auto p = game_.landing_distribution(cell, a);
      for (int l = 0; l < k_; ++l) kernel_[(cell * a_ + a) * k_ + l] = p[l];
    }
  }

  std::vector<int> landed(n_);
  for (int c = 0; c < 2; ++c) {
    next_[c].resize(configs_);
    reward_[c].resize(configs_);
    for (std::size_t l = 0; l < configs_; ++l) {
      std::size_t rest = l;
      for (int i = 0; i < n_; ++i) {
        landed[i] = static_cast<int>(rest % k_);
        rest /= k_;
      }
      JointState pre{landed, c};
      auto tr = game_.resolve(pre, landed);
      double sum = 0.0;
      for (double r : tr.env_rewards) sum += r;
      next_[c][l] = encode_state(tr.next);
      reward_[c][l] = sum / static_cast<double>(n_);
    }
  }

  state_base_.resize(configs_);
  for (std::size_t s = 0; s < configs_; ++s) {
    std::size_t rest = s, base = 0, scale = 1;
    for (int i = 0; i < n_; ++i) {
      base += static_cast<std::size_t>(rest % k_) * a_ * scale;
      rest /= k_;
      scale *= m;
    }
    state_base_[s] = base;
  }
  action_offset_.resize(joint_actions_);
  for (std::size_t j = 0; j < joint_actions_; ++j) {
    std::size_t rest = j, off = 0, scale = 1;
    for (int i = 0; i < n_; ++i) {
      off += (rest % a_) * scale;
      rest /= a_;
      scale *= m;
    }
    action_offset_[j] = off;
  }
}

JointState JointModel::decode_state(std::size_t index) const {
  if (index >= num_states()) throw std::out_of_range("joint state index out of range");
  JointState s;
  s.signal = static_cast<int>(index / configs_);
  std::size_t rest = index % configs_;
  s.per_agent.resize(n_);
  for (int i = 0; i < n_; ++i) {
    s.per_agent[i] = static_cast<int>(rest % k_);
    rest /= k_;
  }
  return s;
}

std::size_t JointModel::encode_state(const JointState& state) const {
  if (state.per_agent.size() != static_cast<std::size_t>(n_)) {
    throw std::invalid_argument("joint state size does not match the model");
  }
  const int c = state.signal.value_or(0);
  if (c != 0 && c != 1) throw std::invalid_argument("signal must be 0 or 1");
  std::size_t idx = 0, scale = 1;
  for (int i = 0; i < n_; ++i) {
    const int x = state.per_agent[i];
    if (x < 0 || x >= k_) throw std::out_of_range("cell code out of range");
    idx += static_cast<std::size_t>(x) * scale;
    scale *= k_;
  }
  return idx + static_cast<std::size_t>(c) * configs_;
}

JointAction JointModel::decode_action(std::size_t index) const {
  if (index >= joint_actions_) throw std::out_of_range("joint action index out of range");
  JointAction a;
  a.per_agent.resize(n_);
  for (int i = 0; i < n_; ++i) {
    a.per_agent[i] = static_cast<int>(index % a_);
    index /= a_;
  }
  return a;
}

std::size_t JointModel::encode_action(const JointAction& action) const {
  if (action.per_agent.size() != static_cast<std::size_t>(n_)) {
    throw std::invalid_argument("joint action size does not match the model");
  }
  std::size_t idx = 0, scale = 1;
  for (int i = 0; i < n_; ++i) {
    const int x = action.per_agent[i];
    if (x < 0 || x >= a_) throw std::out_of_range("action code out of range");
    idx += static_cast<std::size_t>(x) * scale;
    scale *= a_;
  }
  return idx;
}

std::vector<JointModel::Outcome> JointModel::outcomes(std::size_t state,
                                                      std::size_t action) const {
  const auto s = decode_state(state);
  const auto a = decode_action(action);
  const int c = *s.signal;
  std::vector<Outcome> out;
  for (std::size_t l = 0; l < configs_; ++l) {
    double p = 1.0;
    std::size_t rest = l;
    for (int i = 0; i < n_ && p > 0.0; ++i) {
      const int landed = static_cast<int>(rest % k_);
      rest /= k_;
      p *= kernel_[(s.per_agent[i] * a_ + a.per_agent[i]) * k_ + landed];
    }
    if (p > 0.0) out.push_back({next_[c][l], p, reward_[c][l]});
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> JointModel::transition_row(
    std::size_t state, std::size_t action) const {
  std::vector<std::pair<std::size_t, double>> row;
  for (const auto& o : outcomes(state, action)) {
    auto it = std::find_if(row.begin(), row.end(),
                           [&](const auto& e) { return e.first == o.next; });
    if (it == row.end()) {
      row.emplace_back(o.next, o.prob);
    } else {
      it->second += o.prob;
    }
  }
  std::sort(row.begin(), row.end());
  return row;
}

void JointModel::backup(std::span<const double> h, double discount,
                        std::vector<double>& q) const {
  if (h.size() != num_states()) throw std::invalid_argument("value vector has the wrong size");
  const std::size_t m = static_cast<std::size_t>(k_) * a_;
  const std::size_t k = static_cast<std::size_t>(k_);
  q.assign(num_states() * joint_actions_, 0.0);
  buf_a_.resize(pair_space_);
  buf_b_.resize(pair_space_);

  for (int c = 0; c < 2; ++c) {
    // f(l) over landed configurations
    for (std::size_t l = 0; l < configs_; ++l) {
      buf_a_[l] = reward_[c][l] + discount * h[next_[c][l]];
    }
    // contract one agent's landing digit at a time into its (cell, action) digit
    std::size_t low_block = 1;
    std::size_t high = configs_ / k;
    for (int j = 0; j < n_; ++j) {
      for (std::size_t hi = 0; hi < high; ++hi) {
        for (std::size_t p = 0; p < m; ++p) {
          const double* kr = &kernel_[p * k];
          double* dst = &buf_b_[low_block * (p + m * hi)];
          for (std::size_t lo = 0; lo < low_block; ++lo) dst[lo] = 0.0;
          for (std::size_t l = 0; l < k; ++l) {
            const double w = kr[l];
            if (w == 0.0) continue;
            const double* src = &buf_a_[low_block * (l + k * hi)];
            for (std::size_t lo = 0; lo < low_block; ++lo) dst[lo] += w * src[lo];
          }
        }
      }
      std::swap(buf_a_, buf_b_);
      low_block *= m;
      high /= k;
    }
    for (std::size_t s = 0; s < configs_; ++s) {
      const std::size_t row = (static_cast<std::size_t>(c) * configs_ + s) * joint_actions_;
      for (std::size_t ja = 0; ja < joint_actions_; ++ja) {
        q[row + ja] = buf_a_[state_base_[s] + action_offset_[ja]];
      }
    }
  }
}

JointModel build_joint_model(SignalLayout layout, int n, double reward_r, double slip_prob) {
  if (n < 1) throw ConfigError("team size must be positive");
  const int cap = layout == SignalLayout::kTwoStates ? 8 : 4;
  if (n > cap) {
    throw CapacityError("joint model for n=" + std::to_string(n) +
                        " exceeds the enumeration cap of " + std::to_string(cap));
  }
  const auto pop = static_cast<std::size_t>(n);
  return JointModel(layout == SignalLayout::kTwoStates
                        ? SignalGame::two_states(pop, reward_r)
                        : SignalGame::four_states(pop, reward_r, slip_prob));
}

// ---------------------------------------------------------------------------

namespace {

void greedy(const JointModel& model, const std::vector<double>& q,
            std::vector<double>& best, std::vector<std::size_t>& arg) {
  const std::size_t A = model.num_joint_actions();
  best.resize(model.num_states());
  arg.resize(model.num_states());
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    const double* row = &q[s * A];
    std::size_t a_best = 0;
    for (std::size_t a = 1; a < A; ++a) {
      if (row[a] > row[a_best]) a_best = a;
    }
    best[s] = row[a_best];
    arg[s] = a_best;
  }
}

}  // namespace

JointSolution value_iterate(const JointModel& model, const SolveOptions& opt) {
  if (!(opt.tolerance > 0.0)) throw ConfigError("solver tolerance must be positive");
  JointSolution sol;
  sol.criterion = opt.criterion;
  const std::size_t S = model.num_states();
  std::vector<double> h(S, 0.0), best, q;
  std::vector<std::size_t> arg;

  if (opt.criterion == Criterion::kDiscounted) {
    if (!(opt.gamma > 0.0 && opt.gamma < 1.0)) {
      throw DomainError("discounted value iteration needs gamma in (0, 1)");
    }
    for (sol.iterations = 1; sol.iterations <= opt.max_iterations; ++sol.iterations) {
      model.backup(h, opt.gamma, q);
      greedy(model, q, best, arg);
      double delta = 0.0;
      for (std::size_t s = 0; s < S; ++s) delta = std::max(delta, std::abs(best[s] - h[s]));
      h = best;
      sol.residual = delta;
      if (delta < opt.tolerance) break;
    }
    if (sol.iterations > opt.max_iterations) {
      throw ConvergenceError("value iteration did not converge");
    }
    model.backup(h, opt.gamma, q);
    greedy(model, q, best, arg);
    sol.values = h;
    sol.policy = arg;
    return sol;
  }

  if (!(opt.tau > 0.0 && opt.tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  double lo = 0.0, hi = 0.0;
  for (sol.iterations = 1; sol.iterations <= opt.max_iterations; ++sol.iterations) {
    model.backup(h, 1.0, q);
    greedy(model, q, best, arg);
    lo = INFINITY;
    hi = -INFINITY;
    for (std::size_t s = 0; s < S; ++s) {
      const double d = best[s] - h[s];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      h[s] = (1.0 - opt.tau) * h[s] + opt.tau * best[s];
    }
    const double ref = h[0];
    for (double& v : h) v -= ref;
    sol.residual = hi - lo;
    if (sol.residual < opt.tolerance) break;
  }
  if (sol.iterations > opt.max_iterations) {
    throw ConvergenceError("relative value iteration did not converge");
  }
  sol.gain = 0.5 * (lo + hi);
  model.backup(h, 1.0, q);
  greedy(model, q, best, arg);
  sol.values = h;
  sol.policy = arg;
  sol.state_gain = evaluate_average_gain(model, sol.policy);
  return sol;
}

std::vector<double> evaluate_average_gain(const JointModel& model,
                                          std::span<const std::size_t> policy,
                                          double tolerance, std::size_t max_iterations) {
  const std::size_t S = model.num_states();
  if (policy.size() != S) throw std::invalid_argument("policy needs one action per state");
  std::vector<std::vector<JointModel::Outcome>> rows(S);
  for (std::size_t s = 0; s < S; ++s) rows[s] = model.outcomes(s, policy[s]);

  // v_{k+1} = tau r + ((1 - tau) I + tau P) v_k; (v_{k+1} - v_k) / tau -> gain
  const double tau = 0.5;
  std::vector<double> v(S, 0.0), next(S), gain(S, 0.0), prev(S, INFINITY);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    double change = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      double expect = 0.0;
      for (const auto& o : rows[s]) expect += o.prob * (o.team_reward + v[o.next]);
      next[s] = (1.0 - tau) * v[s] + tau * expect;
      gain[s] = (next[s] - v[s]) / tau;
      change = std::max(change, std::abs(gain[s] - prev[s]));
    }
    // keep v bounded; gains are unaffected by a common shift
    const double ref = next[0];
    for (std::size_t s = 0; s < S; ++s) v[s] = next[s] - ref;
    if (change < tolerance) return gain;
    prev = gain;
  }
  throw ConvergenceError("policy evaluation did not converge");
}

std::vector<std::size_t> joint_policy_from_individual(
    const JointModel& model, const std::vector<std::vector<int>>& per_agent) {
  if (per_agent.size() != static_cast<std::size_t>(model.team_size())) {
    throw std::invalid_argument("one individual policy per agent expected");
  }
  std::vector<std::size_t> out(model.num_states());
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    const auto st = model.decode_state(s);
    JointAction a;
    for (int i = 0; i < model.team_size(); ++i) {
      a.per_agent.push_back(per_agent[i].at(st.per_agent[i]));
    }
    out[s] = model.encode_action(a);
  }
  return out;
}

Cycle deterministic_cycle(const JointModel& model, std::span<const std::size_t> policy,
                          std::size_t start) {
  const std::size_t S = model.num_states();
  if (policy.size() != S) throw std::invalid_argument("policy needs one action per state");
  std::vector<std::size_t> next(S);
  std::vector<double> reward(S);
  std::vector<long> seen(S, -1);
  std::vector<std::size_t> path;
  std::size_t s = start;
  while (seen.at(s) < 0) {
    auto out = model.outcomes(s, policy[s]);
    if (out.size() != 1) throw std::invalid_argument("dynamics are not deterministic");
    seen[s] = static_cast<long>(path.size());
    path.push_back(s);
    next[s] = out[0].next;
    reward[s] = out[0].team_reward;
    s = out[0].next;
  }
  Cycle c;
  c.states.assign(path.begin() + seen[s], path.end());
  double total = 0.0;
  for (std::size_t x : c.states) total += reward[x];
  c.gain = total / static_cast<double>(c.states.size());
  return c;
}

std::vector<std::vector<std::size_t>> enumerate_optimal_joint_policies(
    const JointModel& model, double optimal_gain, double tolerance) {
  if (model.game().layout() != SignalLayout::kTwoStates || model.team_size() != 2) {
    throw ConfigError("policy enumeration is limited to TwoStates with n = 2");
  }
  const std::size_t S = model.num_states();
  const std::size_t A = model.num_joint_actions();
  // precomputed deterministic successor and reward per (state, action)
  std::vector<std::size_t> succ(S * A);
  std::vector<double> rew(S * A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      auto out = model.outcomes(s, a);
      succ[s * A + a] = out.at(0).next;
      rew[s * A + a] = out.at(0).team_reward;
    }
  }
  std::vector<std::vector<std::size_t>> optimal;
  std::vector<std::size_t> policy(S, 0);
  std::vector<long> seen(S);
  std::vector<std::size_t> path;
  std::size_t total = 1;
  for (std::size_t s = 0; s < S; ++s) total *= A;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    for (std::size_t s = 0; s < S; ++s) {
      policy[s] = rest % A;
      rest /= A;
    }
    bool all = true;
    for (std::size_t start = 0; start < S && all; ++start) {
      std::fill(seen.begin(), seen.end(), -1);
      path.clear();
      std::size_t s = start;
      while (seen[s] < 0) {
        seen[s] = static_cast<long>(path.size());
        path.push_back(s);
        s = succ[s * A + policy[s]];
      }
      double sum = 0.0;
      for (std::size_t i = static_cast<std::size_t>(seen[s]); i < path.size(); ++i) {
        sum += rew[path[i] * A + policy[path[i]]];
      }
      const double g = sum / static_cast<double>(path.size() - seen[s]);
      all = std::abs(g - optimal_gain) <= tolerance;
    }
    if (all) optimal.push_back(policy);
  }
  return optimal;
}

bool contains_behaviour(const std::vector<std::vector<std::size_t>>& set,
                        std::span<const std::size_t> states,
                        std::span<const std::size_t> actions) {
  if (states.size() != actions.size()) throw std::invalid_argument("states/actions mismatch");
  return std::any_of(set.begin(), set.end(), [&](const auto& p) {
    for (std::size_t j = 0; j < states.size(); ++j) {
      if (p.at(states[j]) != actions[j]) return false;
    }
    return true;
  });
}

// ---------------------------------------------------------------------------

double theorem1_probability(double zeta, int n) {
  if (!(zeta > 0.0 && zeta < 1.0)) throw DomainError("zeta must lie in (0, 1)");
  if (n < 1) throw DomainError("team size must be at least 1");
  return 1.0 - std::pow(zeta, n - 1);
}

std::vector<double> per_agent_stationary(const SignalGame& game,
                                         const StationaryPolicy& policy) {
  const int k = game.num_states();
  if (policy.num_states() != k || policy.num_actions() != game.num_actions()) {
    throw std::invalid_argument("policy shape does not match the game");
  }
  std::vector<double> P(static_cast<std::size_t>(k) * k, 0.0);
  for (int s = 0; s < k; ++s) {
    for (int a = 0; a < game.num_actions(); ++a) {
      auto land = game.landing_distribution(s, a);
      for (int x = 0; x < k; ++x) P[s * k + x] += policy.prob(s, a) * land[x];
    }
  }
  // power iteration on the lazy chain (aperiodic, same stationary vector)
  std::vector<double> pi(k, 1.0 / k), next(k);
  for (int it = 0; it < 1'000'000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < k; ++s) {
      next[s] += 0.5 * pi[s];
      for (int x = 0; x < k; ++x) next[x] += 0.5 * pi[s] * P[s * k + x];
    }
    double diff = 0.0;
    for (int s = 0; s < k; ++s) diff = std::max(diff, std::abs(next[s] - pi[s]));
    pi.swap(next);
    if (diff < 1e-15) return pi;
  }
  throw ConvergenceError("stationary distribution did not converge");
}

double stationary_zeta(const SignalGame& game) {
  auto pi = per_agent_stationary(game, uniform_random_policy(game.num_states(),
                                                             game.num_actions()));
  return 1.0 - pi[cell::kReward];
}

namespace {

// Uniform-policy single-team simulation; `visit` sees (pre-move signal,
// landed cells, team reward) for each step after burn-in.
template <typename Visit>
void simulate_uniform(const SignalGame& game, Rng& rng, Visit&& visit) {
  const std::size_t n = game.population();
  JointState state = game.initial_state(rng);
  std::vector<int> landed(n);
  for (std::size_t step = 0;; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      const int a = uniform_index(rng, game.num_actions());
      landed[i] = game.sample_landing(state.per_agent[i], a, rng);
    }
    const int pre = *state.signal;
    auto tr = game.resolve(state, landed);
    state = std::move(tr.next);
    if (step < 50) continue;
    if (!visit(pre, std::span<const int>(landed), tr.env_rewards)) return;
  }
}

SignalGame single_team_game(SignalLayout layout, int n, double r, double slip) {
  if (n < 1) throw ConfigError("team size must be positive");
  const auto pop = static_cast<std::size_t>(n);
  return layout == SignalLayout::kTwoStates ? SignalGame::two_states(pop, r)
                                            : SignalGame::four_states(pop, r, slip);
}

}  // namespace

TeammateEstimate mc_teammate_in_reward_state(SignalLayout layout, int n,
                                             std::size_t min_events, Rng& rng,
                                             double reward_r, double slip_prob) {
  const auto game = single_team_game(layout, n, reward_r, slip_prob);
  TeammateEstimate est;
  est.team_size = n;
  std::size_t hits = 0, paid = 0;
  simulate_uniform(game, rng, [&](int pre, std::span<const int> landed,
                                  const std::vector<double>&) {
    if (landed[0] != cell::kSignal) return true;
    bool any = false;
    for (std::size_t j = 1; j < landed.size(); ++j) any = any || landed[j] == cell::kReward;
    ++est.events;
    hits += any;
    paid += any && pre == 1;
    return est.events < min_events;
  });
  const double N = static_cast<double>(est.events);
  est.probability = static_cast<double>(hits) / N;
  est.std_error = std::sqrt(est.probability * (1.0 - est.probability) / N);
  est.reward_bearing = static_cast<double>(paid) / N;
  est.reward_bearing_se = std::sqrt(est.reward_bearing * (1.0 - est.reward_bearing) / N);
  return est;
}

std::vector<VariancePoint> team_reward_variance_curve(SignalLayout layout,
                                                      std::span<const int> sizes,
                                                      std::size_t events_per_size,
                                                      Rng& rng, double reward_r,
                                                      double slip_prob) {
  if (!std::is_sorted(sizes.begin(), sizes.end())) {
    throw ConfigError("team sizes must be ascending");
  }
  if (events_per_size < 2) throw ConfigError("need at least two events per size");
  std::vector<VariancePoint> curve;
  for (int n : sizes) {
    const auto game = single_team_game(layout, n, reward_r, slip_prob);
    RunningStats tr_stats, env_stats;
    simulate_uniform(game, rng, [&](int, std::span<const int> landed,
                                    const std::vector<double>& env) {
      double sum = 0.0;
      for (double r : env) {
        sum += r;
        env_stats.add(r);
      }
      if (landed[0] == cell::kSignal) tr_stats.add(sum / static_cast<double>(n));
      return tr_stats.count() < events_per_size;
    });
    VariancePoint p;
    p.team_size = n;
    p.events = tr_stats.count();
    p.mean = tr_stats.mean();
    p.variance = tr_stats.variance();
    p.mean_se = tr_stats.std_error();
    p.env_mean = env_stats.mean();
    p.env_variance = env_stats.variance();
    p.iid_oracle = p.env_variance / n;
    p.sqrt_oracle = p.env_variance / std::sqrt(static_cast<double>(n));
    curve.push_back(p);
  }
  return curve;
}

double gaussian_reward_entropy(double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw DomainError("variance must be positive");
  }
  return 0.5 * std::log(2.0 * std::numbers::pi * variance) + 0.5;
}

}  // namespace teamlab
