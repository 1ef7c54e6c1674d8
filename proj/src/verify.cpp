#include "teamlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "teamlab/errors.hpp"
#include "teamlab/infotheory.hpp"
#include "teamlab/metrics_io.hpp"
#include "teamlab/oracle.hpp"
#include "teamlab/random.hpp"
#include "teamlab/stats.hpp"

namespace teamlab {

namespace {

VerifyRow row(std::string check, int n, double expected, double observed, double tol,
              bool pass) {
  return {std::move(check), n, expected, observed, tol,
          pass ? CheckStatus::kPass : CheckStatus::kFail};
}

VerifyRow info(std::string check, int n, double expected, double observed, double tol) {
  return {std::move(check), n, expected, observed, tol, CheckStatus::kInfo};
}

VerifyRow within(std::string check, int n, double expected, double observed, double tol) {
  return row(std::move(check), n, expected, observed, tol,
             std::abs(observed - expected) <= tol);
}

}  // namespace

std::vector<VerifyRow> verify_theorem1(const VerifyOptions& opt) {
  std::vector<VerifyRow> rows;
  const double zeta = stationary_zeta(SignalGame::two_states(1));
  rows.push_back(within("stationary_zeta", 1, 0.5, zeta, 1e-12));
  for (int n : {1, 2, 3, 5}) {
    Rng rng(derive_seed(opt.seed, 0x7431, n));
    const auto est = mc_teammate_in_reward_state(SignalLayout::kTwoStates, n, opt.events, rng);
    const double expected = theorem1_probability(zeta, n);
    const double tol = n == 1 ? 0.0 : 3.0 * est.std_error;
    rows.push_back(within("teammate_in_reward_state", n, expected, est.probability, tol));
    rows.push_back(info("teammate_reward_bearing", n, expected, est.reward_bearing,
                        3.0 * est.reward_bearing_se));
  }
  return rows;
}

std::vector<VerifyRow> verify_lemma1(const VerifyOptions& opt) {
  std::vector<VerifyRow> rows;
  const int sizes[] = {1, 2, 4, 8, 16, 32};
  Rng rng(derive_seed(opt.seed, 0x1e44a1));
  const auto curve = team_reward_variance_curve(SignalLayout::kTwoStates, sizes, opt.events, rng);

  rows.push_back(within("tr_variance_single", 1, 0.0, curve[0].variance, 0.0));
  for (std::size_t i = 2; i < curve.size(); ++i) {
    rows.push_back(row("tr_variance_decreasing", curve[i].team_size, curve[i - 1].variance,
                       curve[i].variance, 0.0, curve[i].variance < curve[i - 1].variance));
  }
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const auto& p = curve[i];
    rows.push_back(row("tr_variance_vs_iid_oracle", p.team_size, p.iid_oracle, p.variance, 5.0,
                       p.variance <= 5.0 * p.iid_oracle && p.iid_oracle <= 5.0 * p.variance));
    rows.push_back(info("tr_variance_vs_sqrt_oracle", p.team_size, p.sqrt_oracle, p.variance, 5.0));
  }
  const auto& first = curve[1];
  const auto& last = curve.back();
  rows.push_back(row("tr_variance_ratio_last_first", last.team_size, 0.1,
                     last.variance / first.variance, 0.0,
                     last.variance / first.variance < 0.1));
  rows.push_back(within("tr_mean_vs_env_mean", last.team_size, last.env_mean, last.mean,
                        3.0 * last.mean_se));
  // landing on s_c pays the designated agent nothing, so its own share is missing
  const double finite = last.env_mean * (last.team_size - 1) / last.team_size;
  rows.push_back(info("tr_mean_vs_finite_n_mean", last.team_size, finite, last.mean,
                      3.0 * last.mean_se));
  return rows;
}

std::vector<VerifyRow> verify_info_convergence(const VerifyOptions& opt) {
  std::vector<VerifyRow> rows;
  const int sizes[] = {1, 2, 4, 8, 16, 32};
  ProbeConfig probe;
  probe.rollouts = opt.info_rollouts;
  probe.return_bin_width = 1.0 / (4.0 * sizes[5]);
  probe.reward_bin_width = 0.5;
  Rng rng(derive_seed(opt.seed, 0x1f0c));
  const auto scan = max_informative_team_size(
      signal_game_family(SignalLayout::kTwoStates, 1.0, 0.0), sizes, SparsityThresholds{},
      probe, rng);

  std::vector<double> info_values, entropy;
  for (const auto& r : scan.reports) {
    info_values.push_back(r.expected_info);
    entropy.push_back(r.tr_entropy);
  }
  auto trend = [&](const char* name, const std::vector<double>& v) {
    const auto fit = isotonic_non_increasing(v);
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(v[i] - fit[i]));
    for (std::size_t i = 0; i < v.size(); ++i) {
      rows.push_back(info(name, scan.sizes[i], fit[i], v[i], 0.0));
    }
    rows.push_back(info(std::string(name) + "_isotonic_residual", scan.sizes.back(), 0.0, worst,
                        0.0));
    rows.push_back(row(std::string(name) + "_fit_decreases", scan.sizes.back(), fit.front(),
                       fit.back(), 0.0, fit.back() < fit.front()));
    rows.push_back(row(std::string(name) + "_ratio_last_first", scan.sizes.back(), 0.25,
                       v.back() / v.front(), 0.0, v.back() < 0.25 * v.front()));
  };
  trend("expected_info", info_values);
  trend("tr_entropy", entropy);
  return rows;
}

std::vector<VerifyRow> verify_joint_oracle(const VerifyOptions&) {
  std::vector<VerifyRow> rows;
  const double r = 1.0;
  for (int n : {1, 2, 3, 4}) {
    const auto model = build_joint_model(SignalLayout::kTwoStates, n, r);
    const auto sol = value_iterate(model);
    const double expected = n == 1 ? r / 2 : r * (n - 1) / n;
    rows.push_back(within("optimal_average_reward", n, expected, sol.gain, 1e-9));
    const auto [lo, hi] = std::minmax_element(sol.state_gain.begin(), sol.state_gain.end());
    rows.push_back(within("policy_gain_all_starts", n, expected, *lo, 1e-9));
    rows.push_back(within("policy_gain_all_starts_max", n, expected, *hi, 1e-9));

    // replay the extracted policy through the step function until it cycles
    const auto& game = model.game();
    Rng rng(1);
    JointState s = model.decode_state(0);
    std::vector<JointState> seen;
    std::vector<double> rewards;
    while (std::find(seen.begin(), seen.end(), s) == seen.end()) {
      seen.push_back(s);
      auto tr = game.step(s, model.decode_action(sol.policy[model.encode_state(s)]), rng);
      double sum = 0.0;
      for (double x : tr.env_rewards) sum += x;
      rewards.push_back(sum / n);
      s = tr.next;
    }
    const auto start = std::find(seen.begin(), seen.end(), s) - seen.begin();
    double total = 0.0;
    for (std::size_t i = start; i < rewards.size(); ++i) total += rewards[i];
    rows.push_back(within("replayed_policy_reward", n, sol.gain,
                          total / static_cast<double>(rewards.size() - start), 1e-6));
  }

  // n = 2: the three optimal behaviour classes and the all-stay baseline
  const auto model = build_joint_model(SignalLayout::kTwoStates, 2, r);
  const auto set = enumerate_optimal_joint_policies(model, r / 2);
  rows.push_back(info("optimal_policy_count", 2, 0.0, static_cast<double>(set.size()), 0.0));
  using namespace two_states_action;
  const std::vector<int> always_move{kMove, kMove}, always_stay{kStay, kStay};
  auto state = [&](int a, int b, int c) { return model.encode_state({{a, b}, c}); };
  auto action = [&](int a, int b) { return model.encode_action({{a, b}}); };
  struct Class {
    const char* name;
    std::vector<std::vector<int>> individual;
    std::size_t start;
    std::vector<std::size_t> states;
    std::vector<std::size_t> actions;
  };
  const Class classes[] = {
      {"class_move_together", {always_move, always_move}, state(cell::kSignal, cell::kSignal, 0),
       {state(cell::kReward, cell::kReward, 0), state(cell::kSignal, cell::kSignal, 1)},
       {action(kMove, kMove), action(kMove, kMove)}},
      {"class_alternate_apart", {always_move, always_move}, state(cell::kSignal, cell::kReward, 0),
       {state(cell::kSignal, cell::kReward, 1), state(cell::kReward, cell::kSignal, 1)},
       {action(kMove, kMove), action(kMove, kMove)}},
      {"class_stay_opposite", {always_stay, always_stay}, state(cell::kSignal, cell::kReward, 1),
       {state(cell::kSignal, cell::kReward, 1)},
       {action(kStay, kStay)}},
  };
  for (const auto& c : classes) {
    const auto policy = joint_policy_from_individual(model, c.individual);
    const auto gains = evaluate_average_gain(model, policy);
    rows.push_back(within(std::string(c.name) + "_gain", 2, r / 2, gains[c.start], 1e-9));
    const bool member = contains_behaviour(set, c.states, c.actions);
    rows.push_back(row(std::string(c.name) + "_in_optimal_set", 2, 1.0, member ? 1.0 : 0.0, 0.0,
                       member));
  }
  const auto stay = joint_policy_from_individual(model, {always_stay, always_stay});
  const auto stay_gains = evaluate_average_gain(model, stay);
  rows.push_back(within("both_stay_signal_gain", 2, 0.0,
                        stay_gains[state(cell::kSignal, cell::kSignal, 0)], 1e-12));

  // transition rows of the stochastic model
  const auto four = build_joint_model(SignalLayout::kFourStates, 2, r, 0.1);
  double worst = 0.0;
  for (std::size_t s = 0; s < four.num_states(); ++s) {
    for (std::size_t a = 0; a < four.num_joint_actions(); ++a) {
      double sum = 0.0;
      for (const auto& [next, p] : four.transition_row(s, a)) sum += p;
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  rows.push_back(within("fourstates_row_sums", 2, 0.0, worst, 1e-12));
  return rows;
}

std::vector<VerifyRow> run_verification(std::string_view which, const VerifyOptions& options) {
  if (which == "theorem1") return verify_theorem1(options);
  if (which == "lemma1") return verify_lemma1(options);
  if (which == "info-convergence") return verify_info_convergence(options);
  if (which == "joint-oracle") return verify_joint_oracle(options);
  if (which == "all") {
    std::vector<VerifyRow> rows;
    for (auto part : {"theorem1", "lemma1", "info-convergence", "joint-oracle"}) {
      auto r = run_verification(part, options);
      rows.insert(rows.end(), r.begin(), r.end());
    }
    return rows;
  }
  throw ConfigError("unknown verification '" + std::string(which) + "'");
}

bool all_passed(const std::vector<VerifyRow>& rows) {
  return std::none_of(rows.begin(), rows.end(),
                      [](const VerifyRow& r) { return r.status == CheckStatus::kFail; });
}

std::string_view status_name(CheckStatus status) {
  switch (status) {
    case CheckStatus::kPass: return "pass";
    case CheckStatus::kFail: return "FAIL";
    case CheckStatus::kInfo: return "info";
  }
  return "?";
}

std::string format_verify_table(const std::vector<VerifyRow>& rows) {
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.check.size());
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %4s %14s %14s %12s  %s\n", static_cast<int>(width),
                "check", "n", "expected", "observed", "tolerance", "status");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s %4d %14.8g %14.8g %12.4g  %s\n", static_cast<int>(width),
                  r.check.c_str(), r.n, r.expected, r.observed, r.tolerance,
                  std::string(status_name(r.status)).c_str());
    out << buf;
  }
  return out.str();
}

std::string format_verify_csv(const std::vector<VerifyRow>& rows) {
  std::string out = "check,n,expected,observed,tolerance,pass\n";
  for (const auto& r : rows) {
    out += r.check + ',' + std::to_string(r.n) + ',' + format_value(r.expected) + ',' +
           format_value(r.observed) + ',' + format_value(r.tolerance) + ',' +
           std::string(status_name(r.status)) + '\n';
  }
  return out;
}

}  // namespace teamlab
