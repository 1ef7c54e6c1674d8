#pragma once

// Experiment configuration: a flat `key = value` text format with `#`
// comments. Unknown keys are rejected; every semantic violation is reported.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "teamlab/envs.hpp"
#include "teamlab/learners.hpp"

namespace teamlab {

enum class EnvKind { kTwoStates, kFourStates, kIpd };

std::string_view env_kind_name(EnvKind kind);

struct ExperimentConfig {
  EnvKind env = EnvKind::kFourStates;
  /// Population size. 0 means "one team of the swept size" for the signal
  /// games and 30 for the IPD.
  int n_agents = 0;
  std::vector<int> team_sizes{1};
  int trials = 50;
  int episodes = 1000;
  int steps_per_episode = 100;
  LearnerConfig learner;
  double reward_r = 1.0;
  double slip_prob = 0.1;
  IpdParams ipd;
  int info_horizon = 50;
  /// Return bin width for the information probe; 0 picks the default.
  double bin_width = 0.0;
  int info_rollouts = 64;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  /// Population used when the team size is n.
  std::size_t population_for(int team_size) const;
  double return_bin_width() const;
  /// Every violation, one message each; empty when valid.
  std::vector<std::string> violations() const;
  /// Throws ConfigError listing all violations.
  void validate() const;
  /// Canonical `key = value` rendering; parsing it gives back the same config.
  std::string canonical() const;
  /// FNV-1a of canonical().
  std::uint64_t hash() const;
};

/// Parses and validates. Missing keys keep their defaults, except that the
/// IPD defaults to a lower exploration rate (0.1) unless epsilon_explore is
/// given. Throws ConfigError with line context.
ExperimentConfig load_config(std::string_view text);

/// Reads a file and parses it. Throws IoError when it cannot be read.
ExperimentConfig load_config_file(const std::string& path);

}  // namespace teamlab
