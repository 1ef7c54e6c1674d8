#pragma once

// Seeded multi-trial learning runs, the reported metrics and the
// information probe under initial policies.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "teamlab/config.hpp"
#include "teamlab/infotheory.hpp"
#include "teamlab/learners.hpp"
#include "teamlab/metrics_io.hpp"

namespace teamlab {

/// Optimal mean team reward per step for the signal games: r/2 when n = 1,
/// r(n-1)/n otherwise.
double optimal_step_reward(int team_size, double reward_r = 1.0);

/// achieved / baseline. Throws DomainError when the baseline is not positive.
double fraction_of_optimal(double achieved, double baseline);

/// Per agent: mean over states of (max_a Q - min_a Q) divided by max |Q| (0
/// for an all-zero table); then averaged over agents.
double q_gap(std::span<const QTable> tables);

struct VisitationDeviation {
  std::vector<double> value;  // ratio - 1, or the raw frequency where optimal is 0
  std::vector<bool> raw;
};

/// Per-cell comparison of team visit counts with the optimal joint profile:
/// n = 1 -> (1/2, 1/2, 0, 0), n > 1 -> (1/n, (n-1)/n, 0, 0).
VisitationDeviation visitation_vs_optimal(std::span<const double> visit_counts,
                                          int team_size);

using ProgressFn = std::function<void(const std::string&)>;

struct RunOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  ProgressFn progress;   // optional
  /// Restrict to one entry of config.team_sizes; seeds are unchanged.
  int only_size_index = -1;
};

/// Checkpoint spacing in episodes: max(1, episodes / 100).
int checkpoint_every(int episodes);

/// Rows for every team size in config.team_sizes (in order), each trial
/// seeded from (seed, team-size index, trial). Output does not depend on the
/// thread count.
///
/// Metrics per checkpoint (averaged over the episodes since the previous
/// checkpoint): mean_reward (per agent per step), episode_reward,
/// fraction_of_optimal and visit_<cell>/visit_dev_<cell> for the signal
/// games, q_gap, policy_entropy. After training: expected_info,
/// variance_info, tr_entropy and sparsity_flag under the learned epsilon-greedy
/// policies, at checkpoint = episodes.
MetricsTable run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Information probe only, under uniform initial policies; one block of
/// rows per (team size, trial).
MetricsTable run_info_probe(const ExperimentConfig& config, const RunOptions& options = {});

/// Probe settings derived from a config.
ProbeConfig probe_config_for(const ExperimentConfig& config);

/// Thresholds used for the sparsity_flag metric.
SparsityThresholds default_sparsity_thresholds();

}  // namespace teamlab
