#include "teamlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "teamlab/envs.hpp"
#include "teamlab/errors.hpp"
#include "teamlab/random.hpp"

namespace teamlab {

double optimal_step_reward(int team_size, double reward_r) {
  if (team_size < 1) throw DomainError("team size must be at least 1");
  if (team_size == 1) return 0.5 * reward_r;
  return reward_r * static_cast<double>(team_size - 1) / static_cast<double>(team_size);
}

double fraction_of_optimal(double achieved, double baseline) {
  if (!(baseline > 0.0)) throw DomainError("optimal baseline must be positive");
  return achieved / baseline;
}

double q_gap(std::span<const QTable> tables) {
  if (tables.empty()) throw std::invalid_argument("q_gap needs at least one table");
  double total = 0.0;
  for (const auto& t : tables) {
    const double scale = t.max_abs();
    if (scale == 0.0) continue;
    double spread = 0.0;
    for (int s = 0; s < t.num_states(); ++s) spread += t.max_value(s) - t.min_value(s);
    total += spread / t.num_states() / scale;
  }
  return total / static_cast<double>(tables.size());
}

VisitationDeviation visitation_vs_optimal(std::span<const double> visit_counts, int team_size) {
  if (team_size < 1) throw DomainError("team size must be at least 1");
  if (visit_counts.size() < 2) throw std::invalid_argument("need counts for every cell");
  double total = 0.0;
  for (double c : visit_counts) {
    if (c < 0.0) throw std::invalid_argument("negative visit count");
    total += c;
  }
  if (total <= 0.0) throw EstimationError("no visits recorded");
  std::vector<double> optimal(visit_counts.size(), 0.0);
  if (team_size == 1) {
    optimal[cell::kSignal] = 0.5;
    optimal[cell::kReward] = 0.5;
  } else {
    optimal[cell::kSignal] = 1.0 / team_size;
    optimal[cell::kReward] = static_cast<double>(team_size - 1) / team_size;
  }
  VisitationDeviation out;
  for (std::size_t s = 0; s < visit_counts.size(); ++s) {
    const double freq = visit_counts[s] / total;
    if (optimal[s] > 0.0) {
      out.value.push_back(freq / optimal[s] - 1.0);
      out.raw.push_back(false);
    } else {
      out.value.push_back(freq);
      out.raw.push_back(true);
    }
  }
  return out;
}

int checkpoint_every(int episodes) { return std::max(1, episodes / 100); }

SparsityThresholds default_sparsity_thresholds() { return {1e-3, 1e-4}; }

ProbeConfig probe_config_for(const ExperimentConfig& config) {
  ProbeConfig p;
  p.gamma = config.learner.gamma;
  p.horizon = config.info_horizon;
  p.rollouts = config.info_rollouts;
  p.return_bin_width = config.return_bin_width();
  p.reward_bin_width = 0.5 * config.reward_r;
  return p;
}

namespace {

struct Instance {
  std::unique_ptr<Environment> env;
  TeamStructure teams;
};

Instance make_instance(const ExperimentConfig& config, int team_size) {
  const std::size_t pop = config.population_for(team_size);
  auto teams = TeamStructure::uniform(pop, team_size);
  switch (config.env) {
    case EnvKind::kTwoStates:
      return {make_environment(SignalGame::two_states(pop, config.reward_r)), teams};
    case EnvKind::kFourStates:
      return {make_environment(
                  SignalGame::four_states(pop, config.reward_r, config.slip_prob)),
              teams};
    case EnvKind::kIpd:
      return {make_environment(IpdGame(pop, config.ipd), teams), teams};
  }
  throw ConfigError("unknown environment");
}

bool is_signal(EnvKind kind) { return kind != EnvKind::kIpd; }

const char* cell_name(int c) {
  static const char* names[] = {"sc", "sr", "s3", "s4"};
  return names[c];
}

StationaryPolicy epsilon_greedy_policy(const QTable& q, double epsilon) {
  const int S = q.num_states(), A = q.num_actions();
  std::vector<double> probs(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s) {
    auto row = q.row(s);
    const double best = *std::max_element(row.begin(), row.end());
    const int ties = static_cast<int>(std::count(row.begin(), row.end(), best));
    for (int a = 0; a < A; ++a) {
      probs[s * A + a] = epsilon / A + (row[a] == best ? (1.0 - epsilon) / ties : 0.0);
    }
  }
  return StationaryPolicy(S, A, std::move(probs));
}

void append_probe_rows(std::vector<MetricsRow>& rows, int trial, int n, std::int64_t cp,
                       const ProbeSamples& samples, const ProbeConfig& probe) {
  InfoReport report;
  try {
    report = analyze(samples, probe.min_samples_per_pair);
  } catch (const EstimationError&) {
    return;
  }
  const auto verdict = classify_sparsity(report, default_sparsity_thresholds());
  rows.push_back({trial, n, cp, "expected_info", report.expected_info});
  rows.push_back({trial, n, cp, "variance_info", report.variance_info});
  rows.push_back({trial, n, cp, "tr_entropy", report.tr_entropy});
  rows.push_back({trial, n, cp, "sparsity_flag", verdict.verdict == Sparsity::kSparse ? 1.0 : 0.0});
  rows.push_back({trial, n, cp, "info_insufficient_pairs",
                  static_cast<double>(report.insufficient_pairs.size())});
}

std::vector<MetricsRow> run_trial(const ExperimentConfig& config, std::size_t size_index,
                                  int trial) {
  const int n = config.team_sizes.at(size_index);
  Rng rng(derive_seed(config.seed, size_index, static_cast<std::uint64_t>(trial)));
  auto [env, teams] = make_instance(config, n);
  const std::size_t N = env->population();
  const int S = env->num_observations(), A = env->num_actions();
  const LearnerConfig& lc = config.learner;

  std::vector<QTable> q(N, QTable(S, A));
  std::vector<int> obs(N), act(N);
  std::vector<double> visits(S, 0.0), action_counts(static_cast<std::size_t>(S) * A, 0.0);
  double reward_sum = 0.0;
  int window_episodes = 0;
  const int every = checkpoint_every(config.episodes);
  const double baseline =
      is_signal(config.env) ? optimal_step_reward(n, config.reward_r) * config.steps_per_episode
                            : 0.0;
  std::vector<MetricsRow> rows;

  for (int e = 0; e < config.episodes; ++e) {
    env->reset(rng);
    for (std::size_t i = 0; i < N; ++i) obs[i] = env->observe({i});
    for (int t = 0; t < config.steps_per_episode; ++t) {
      for (std::size_t i = 0; i < N; ++i) {
        act[i] = select_action(q[i], obs[i], lc.epsilon, rng);
        action_counts[static_cast<std::size_t>(obs[i]) * A + act[i]] += 1.0;
        visits[obs[i]] += 1.0;
      }
      const auto env_rewards = env->step(act, rng);
      const auto tr = team_reward(env_rewards, teams);
      for (std::size_t i = 0; i < N; ++i) {
        const int next = env->observe({i});
        q_update(q[i], obs[i], act[i], tr[i], next, lc);
        reward_sum += tr[i];
        obs[i] = next;
      }
    }
    ++window_episodes;
    if ((e + 1) % every != 0 && e + 1 != config.episodes) continue;

    const std::int64_t cp = e + 1;
    const double per_agent_episode = reward_sum / static_cast<double>(N) / window_episodes;
    rows.push_back({trial, n, cp, "mean_reward", per_agent_episode / config.steps_per_episode});
    rows.push_back({trial, n, cp, "episode_reward", per_agent_episode});
    if (is_signal(config.env)) {
      rows.push_back({trial, n, cp, "fraction_of_optimal",
                      fraction_of_optimal(per_agent_episode, baseline)});
      const auto dev = visitation_vs_optimal(visits, n);
      double total = 0.0;
      for (double v : visits) total += v;
      for (int c = 0; c < S; ++c) {
        rows.push_back({trial, n, cp, std::string("visit_") + cell_name(c), visits[c] / total});
        rows.push_back({trial, n, cp, std::string("visit_dev_") + cell_name(c), dev.value[c]});
      }
    }
    rows.push_back({trial, n, cp, "q_gap", q_gap(q)});
    rows.push_back({trial, n, cp, "policy_entropy", empirical_policy_entropy(action_counts, A)});
    reward_sum = 0.0;
    window_episodes = 0;
    std::fill(visits.begin(), visits.end(), 0.0);
    std::fill(action_counts.begin(), action_counts.end(), 0.0);
  }

  const ProbeConfig probe = probe_config_for(config);
  std::vector<StationaryPolicy> policies;
  for (const auto& table : q) policies.push_back(epsilon_greedy_policy(table, lc.epsilon));
  auto samples = collect_return_samples(*env, teams, policies, probe, rng);
  append_probe_rows(rows, trial, n, config.episodes, samples, probe);
  return rows;
}

std::vector<MetricsRow> probe_trial(const ExperimentConfig& config, std::size_t size_index,
                                    int trial) {
  const int n = config.team_sizes.at(size_index);
  Rng rng(derive_seed(config.seed ^ 0x70726f6265ULL, size_index, static_cast<std::uint64_t>(trial)));
  auto [env, teams] = make_instance(config, n);
  const ProbeConfig probe = probe_config_for(config);
  const auto policy = uniform_random_policy(env->num_observations(), env->num_actions());
  auto samples = collect_return_samples(*env, teams, std::span(&policy, 1), probe, rng);
  std::vector<MetricsRow> rows;
  append_probe_rows(rows, trial, n, 0, samples, probe);
  return rows;
}

using TrialFn = std::vector<MetricsRow> (*)(const ExperimentConfig&, std::size_t, int);

MetricsTable run_jobs(const ExperimentConfig& config, const RunOptions& options, TrialFn fn,
                      const char* what) {
  config.validate();
  const std::size_t trials = static_cast<std::size_t>(config.trials);
  std::size_t first = 0, sizes = config.team_sizes.size();
  if (options.only_size_index >= 0) {
    first = static_cast<std::size_t>(options.only_size_index);
    if (first >= sizes) throw std::out_of_range("team-size index out of range");
    sizes = 1;
  }
  const std::size_t jobs = sizes * trials;
  std::vector<std::vector<MetricsRow>> results(jobs);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  std::size_t done = 0;

  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs) return;
      try {
        results[j] = fn(config, first + j / trials, static_cast<int>(j % trials));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(jobs);
        return;
      }
      std::lock_guard lock(mu);
      ++done;
      if (options.progress) {
        options.progress(std::string(what) + " n=" +
                         std::to_string(config.team_sizes[first + j / trials]) + " trial " +
                         std::to_string(j % trials + 1) + "/" + std::to_string(trials) + " (" +
                         std::to_string(done) + "/" + std::to_string(jobs) + ")");
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  MetricsTable table;
  for (auto& r : results) {
    table.rows.insert(table.rows.end(), std::make_move_iterator(r.begin()),
                      std::make_move_iterator(r.end()));
  }
  return table;
}

}  // namespace

MetricsTable run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  return run_jobs(config, options, &run_trial, "train");
}

MetricsTable run_info_probe(const ExperimentConfig& config, const RunOptions& options) {
  return run_jobs(config, options, &probe_trial, "probe");
}

}  // namespace teamlab
