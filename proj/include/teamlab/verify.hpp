#pragma once

// Verification checks behind the `verify` subcommand.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace teamlab {

enum class CheckStatus { kPass, kFail, kInfo };

struct VerifyRow {
  std::string check;
  int n = 0;
  double expected = 0.0;
  double observed = 0.0;
  double tolerance = 0.0;
  CheckStatus status = CheckStatus::kInfo;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::size_t events = 100'000;  // conditioning events per Monte Carlo size
  int info_rollouts = 64;
};

std::vector<VerifyRow> verify_theorem1(const VerifyOptions& options);
std::vector<VerifyRow> verify_lemma1(const VerifyOptions& options);
std::vector<VerifyRow> verify_info_convergence(const VerifyOptions& options);
std::vector<VerifyRow> verify_joint_oracle(const VerifyOptions& options);

/// Dispatch by name: theorem1, lemma1, info-convergence, joint-oracle, all.
/// Throws ConfigError on an unknown name.
std::vector<VerifyRow> run_verification(std::string_view which, const VerifyOptions& options);

bool all_passed(const std::vector<VerifyRow>& rows);

std::string_view status_name(CheckStatus status);
/// Aligned human-readable table.
std::string format_verify_table(const std::vector<VerifyRow>& rows);
/// Header `check,n,expected,observed,tolerance,pass` plus one line per row.
std::string format_verify_csv(const std::vector<VerifyRow>& rows);

}  // namespace teamlab
