#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "support.hpp"
#include "teamlab/errors.hpp"
#include "teamlab/infotheory.hpp"
#include "teamlab/stats.hpp"

using namespace teamlab;

namespace {

const double kLn2 = std::log(2.0);

// every agent gets the same fixed reward whatever it does
class ConstantEnv : public Environment {
 public:
  ConstantEnv(std::size_t n, double r) : n_(n), r_(r) {}
  std::size_t population() const override { return n_; }
  int num_observations() const override { return 2; }
  int num_actions() const override { return 2; }
  void reset(Rng& rng) override { obs_ = uniform_index(rng, 2); }
  int observe(AgentId) const override { return obs_; }
  std::vector<double> step(std::span<const int>, Rng& rng) override {
    obs_ = uniform_index(rng, 2);
    return std::vector<double>(n_, r_);
  }
  int location(AgentId) const override { return obs_; }
  std::string_view name() const override { return "constant"; }

 private:
  std::size_t n_;
  double r_;
  int obs_ = 0;
};

std::vector<ReturnSample> repeat(int state, int action, std::int64_t bin, int count) {
  return std::vector<ReturnSample>(count, ReturnSample{0, state, action, bin});
}

void append(std::vector<ReturnSample>& to, const std::vector<ReturnSample>& more) {
  to.insert(to.end(), more.begin(), more.end());
}

// one-step bandit: action 0 always returns 0, action 1 always returns 1
std::vector<ReturnSample> bandit(int state, int per_arm) {
  auto s = repeat(state, 0, 0, per_arm);
  append(s, repeat(state, 1, 1, per_arm));
  return s;
}

ProbeSamples probe(SignalLayout layout, int n, int rollouts, std::uint64_t seed,
                   double bin = 1.0 / 128) {
  auto [env, teams] = signal_game_family(layout, 1.0, 0.1)(n);
  ProbeConfig cfg;
  cfg.rollouts = rollouts;
  cfg.return_bin_width = bin;
  auto policy = uniform_random_policy(env->num_observations(), env->num_actions());
  Rng rng(seed);
  return collect_return_samples(*env, teams, std::span(&policy, 1), cfg, rng);
}

}  // namespace

TEST_CASE("binning") {
  ReturnBinning b(0.25);
  CHECK(b.bin_of(0.0) == 0);
  CHECK(b.bin_of(0.1) == 0);
  CHECK(b.bin_of(0.2) == 1);
  CHECK(b.bin_of(-0.2) == -1);
  CHECK(b.center(3) == 0.75);
  CHECK_THROWS_AS(ReturnBinning(0.0), ConfigError);
  CHECK_THROWS_AS(ReturnBinning(-1.0), ConfigError);
  CHECK_THROWS_AS(b.bin_of(std::nan("")), EstimationError);
}

TEST_CASE("return distributions: bandit point masses") {
  auto samples = bandit(0, 50);
  auto t = ReturnDistributionTable::build(1, 2, ReturnBinning(1.0), samples);
  auto c0 = t.conditional(0, 0), c1 = t.conditional(0, 1);
  REQUIRE(t.bin_count() == 2);
  CHECK(c0 == std::vector<double>{1.0, 0.0});
  CHECK(c1 == std::vector<double>{0.0, 1.0});
  CHECK(t.mixture(0) == std::vector<double>{0.5, 0.5});
  CHECK(t.behaviour_prob(0, 1) == 0.5);

  // KL(delta || 1/2 delta + 1/2 delta) = ln 2
  CHECK(info_gain(t, 0, 0) == doctest::Approx(kLn2).epsilon(1e-14));
  CHECK(info_gain(t, 0, 1) == doctest::Approx(kLn2).epsilon(1e-14));
  CHECK(expected_info(t) == doctest::Approx(kLn2).epsilon(1e-14));
  CHECK(variance_of_info(t) == doctest::Approx(0.0));
}

TEST_CASE("return distributions: two-point variance and weighting") {
  // state 0: both actions return 0 (info 0), state 1: the bandit (info ln 2)
  auto samples = repeat(0, 0, 0, 20);
  append(samples, repeat(0, 1, 0, 20));
  append(samples, bandit(1, 20));
  auto t = ReturnDistributionTable::build(2, 2, ReturnBinning(1.0), samples);
  CHECK(info_gain(t, 0, 0) == 0.0);
  CHECK(expected_info(t) == doctest::Approx(kLn2 / 2));
  CHECK(variance_of_info(t) == doctest::Approx(kLn2 * kLn2 / 4).epsilon(1e-12));

  // visitation piling onto the zero-info pair drives the expectation to 0
  double previous = expected_info(t);
  for (int heavy : {1'000, 100'000, 1'000'000}) {
    auto s = repeat(0, 0, 0, heavy);
    append(s, bandit(1, 1));
    auto w = ReturnDistributionTable::build(2, 2, ReturnBinning(1.0), s);
    const double oracle = 2.0 / (heavy + 2) * kLn2;
    CHECK(expected_info(w) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(expected_info(w) < previous);
    previous = expected_info(w);
  }
}

TEST_CASE("return distributions: degenerate cases") {
  auto same = repeat(0, 0, 3, 10);
  append(same, repeat(0, 1, 3, 30));
  auto t = ReturnDistributionTable::build(1, 2, ReturnBinning(0.5), same);
  CHECK(info_gain(t, 0, 0) == 0.0);
  CHECK(info_gain(t, 0, 1) == 0.0);
  CHECK(expected_info(t) == 0.0);
  CHECK(variance_of_info(t) == 0.0);
  CHECK_THROWS_AS(t.conditional(1, 0), std::out_of_range);

  auto partial = repeat(0, 0, 0, 5);
  auto p = ReturnDistributionTable::build(1, 2, ReturnBinning(1.0), partial, 3);
  CHECK_THROWS_AS(p.conditional(0, 1), EstimationError);
  REQUIRE(p.insufficient().size() == 1);
  CHECK(p.insufficient()[0] == std::pair<int, int>{0, 1});
}

TEST_CASE("property: gibbs equality case") {
  Rng rng(derive_seed(testsupport::master_seed(), 53));
  for (int trial = 0; trial < 200; ++trial) {
    // every action draws its return bins with the same counts
    std::vector<ReturnSample> s;
    const int bins = 1 + uniform_index(rng, 6);
    std::vector<int> counts(bins);
    for (auto& c : counts) c = 1 + uniform_index(rng, 9);
    const int scale_a = 1 + uniform_index(rng, 3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < bins; ++b) append(s, repeat(0, a, b, counts[b] * (a == 1 ? scale_a : 1)));
    auto t = ReturnDistributionTable::build(1, 3, ReturnBinning(1.0), s);
    for (int a = 0; a < 3; ++a) CHECK(std::abs(info_gain(t, 0, a)) < 1e-12);

    // perturb one action's distribution: the gain becomes strictly positive
    append(s, repeat(0, 2, bins, 5));
    auto u = ReturnDistributionTable::build(1, 3, ReturnBinning(1.0), s);
    CHECK(info_gain(u, 0, 2) > 1e-6);
  }
}

TEST_CASE("property: mixture identity and non-negativity") {
  const auto seed = testsupport::master_seed();
  for (auto layout : {SignalLayout::kTwoStates, SignalLayout::kFourStates}) {
    for (int n : {1, 2, 5}) {
      auto samples = probe(layout, n, 16, derive_seed(seed, 59, n));
      auto t = ReturnDistributionTable::build(samples.num_states, samples.num_actions,
                                              samples.return_binning, samples.returns);
      for (int s = 0; s < t.num_states(); ++s) {
        if (t.state_count(s) == 0) continue;
        auto mix = t.mixture(s), marg = t.marginal(s);
        CHECK(testsupport::l1(mix, marg) < 1e-9);
        CHECK(testsupport::sum(marg) == doctest::Approx(1.0).epsilon(1e-9));
        for (int a = 0; a < t.num_actions(); ++a) {
          if (t.sample_count(s, a) == 0) continue;
          CHECK(testsupport::sum(t.conditional(s, a)) == doctest::Approx(1.0).epsilon(1e-9));
          CHECK(info_gain(t, s, a) >= -1e-12);
        }
      }
      CHECK(expected_info(t) >= -1e-12);
      CHECK(variance_of_info(t) >= -1e-12);
      auto report = analyze(samples);
      CHECK(report.tr_entropy >= 0.0);
      CHECK(report.approximations.size() == 2);
    }
  }

  // random tables with arbitrary supports
  Rng rng(derive_seed(seed, 61));
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ReturnSample> s;
    for (int k = 0; k < 400; ++k)
      s.push_back({0, uniform_index(rng, 3), uniform_index(rng, 4), uniform_index(rng, 7) - 3});
    auto t = ReturnDistributionTable::build(3, 4, ReturnBinning(0.1), s);
    for (int st = 0; st < 3; ++st) {
      if (t.state_count(st) == 0) continue;
      CHECK(testsupport::l1(t.mixture(st), t.marginal(st)) < 1e-9);
      for (int a = 0; a < 4; ++a)
        if (t.sample_count(st, a)) CHECK(info_gain(t, st, a) >= -1e-12);
    }
    CHECK(variance_of_info(t) >= -1e-12);
  }
}

TEST_CASE("team reward entropy") {
  ReturnBinning half(0.5);
  std::vector<double> flat(100, 0.75);
  CHECK(team_reward_entropy(flat, half) == 0.0);
  std::vector<double> two{0.0, 1.0, 0.0, 1.0};
  CHECK(team_reward_entropy(two, half) == doctest::Approx(kLn2));
  std::vector<double> skew{0, 0, 0, 1};
  std::vector<double> p{0.75, 0.25};
  CHECK(team_reward_entropy(skew, half) == doctest::Approx(testsupport::entropy_of(p)));
  CHECK_THROWS_AS(team_reward_entropy(two, half, 10), EstimationError);

  // larger teams smooth the team reward: lower entropy at the same budget
  const auto seed = testsupport::master_seed();
  const auto small = analyze(probe(SignalLayout::kTwoStates, 1, 32, derive_seed(seed, 67)));
  const auto large = analyze(probe(SignalLayout::kTwoStates, 32, 32, derive_seed(seed, 71)));
  CHECK(large.tr_entropy < small.tr_entropy);
}

TEST_CASE("sparsity classification") {
  SparsityThresholds th{0.01, 0.01};
  InfoReport zero;
  CHECK(classify_sparsity(zero, th).verdict == Sparsity::kSparse);
  CHECK(classify_sparsity(zero, {1e-12, 1e-12}).verdict == Sparsity::kSparse);

  InfoReport bandit_report;
  bandit_report.expected_info = kLn2;
  bandit_report.variance_info = kLn2 * kLn2 / 4;
  auto v = classify_sparsity(bandit_report, th);
  CHECK(v.verdict == Sparsity::kNotSparse);
  CHECK(v.info_margin == doctest::Approx(kLn2 - 0.01));

  InfoReport flat;
  flat.expected_info = 5.0;
  flat.variance_info = 0.0;
  CHECK(classify_sparsity(flat, th).verdict == Sparsity::kSparse);

  CHECK_THROWS_AS(classify_sparsity(flat, {0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS((SparsityThresholds{0.1, 0.0}.validate()), ConfigError);
}

TEST_CASE("constant rewards: point-mass returns and no informative size") {
  ProbeConfig cfg;
  cfg.rollouts = 4;
  cfg.samples_per_rollout = 50;
  // per-step reward whose H-step discounted sum is 5
  const double r = 5.0 * (1 - cfg.gamma) / (1 - std::pow(cfg.gamma, cfg.horizon));
  ConstantEnv env(3, r);
  auto teams = TeamStructure::uniform(3, 3);
  auto policy = uniform_random_policy(2, 2);
  Rng rng(3);
  auto samples = collect_return_samples(env, teams, std::span(&policy, 1), cfg, rng);
  const auto five = samples.return_binning.bin_of(5.0);
  for (const auto& s : samples.returns) CHECK(s.bin == five);
  auto report = analyze(samples);
  CHECK(report.expected_info == 0.0);
  CHECK(report.variance_info == 0.0);
  CHECK(report.tr_entropy == 0.0);

  TeamSizeFamily family = [r](int n) {
    return std::make_pair(std::unique_ptr<Environment>(new ConstantEnv(n, r)),
                          TeamStructure::uniform(n, n));
  };
  std::vector<int> sizes{1, 2, 4};
  auto scan = max_informative_team_size(family, sizes, {1e-6, 1e-9}, cfg, rng);
  CHECK_FALSE(scan.best.has_value());
  std::vector<int> unsorted{4, 2};
  CHECK_THROWS_AS(max_informative_team_size(family, unsorted, {1e-3, 1e-4}, cfg, rng), ConfigError);
}

TEST_CASE("team-size rule on two states") {
  ProbeConfig cfg;
  cfg.rollouts = 64;
  cfg.return_bin_width = 1.0 / 128;
  std::vector<int> sizes{1, 2, 4, 8, 16, 32};
  Rng rng(derive_seed(testsupport::master_seed(), 73));
  auto scan = max_informative_team_size(signal_game_family(SignalLayout::kTwoStates, 1.0, 0.1),
                                        sizes, {0.045, 1e-7}, cfg, rng);
  REQUIRE(scan.reports.size() == sizes.size());
  std::vector<double> info;
  for (const auto& r : scan.reports) info.push_back(r.expected_info);
  INFO("expected_info " << info[0] << " " << info[1] << " " << info[2] << " " << info[3] << " "
                        << info[4] << " " << info[5]);
  REQUIRE(scan.best.has_value());
  CHECK(*scan.best > 1);
  CHECK(*scan.best < 32);
  // qualifying sizes form a prefix of the sweep
  for (std::size_t i = 0; i < sizes.size(); ++i) CHECK(scan.qualifies[i] == (sizes[i] <= *scan.best));
}

TEST_CASE("property: bootstrap standard error scales with rollouts") {
  const auto seed = testsupport::master_seed();
  auto few = probe(SignalLayout::kTwoStates, 2, 32, derive_seed(seed, 79));
  auto many = probe(SignalLayout::kTwoStates, 2, 64, derive_seed(seed, 83));
  Rng rng(derive_seed(seed, 89));
  const double se_few = bootstrap_expected_info_se(few, 200, rng);
  const double se_many = bootstrap_expected_info_se(many, 200, rng);
  const double ratio = se_few / se_many;
  INFO("se(32)=" << se_few << " se(64)=" << se_many);
  CHECK(ratio >= std::sqrt(2.0) / 2);
  CHECK(ratio <= 2 * std::sqrt(2.0));
}
