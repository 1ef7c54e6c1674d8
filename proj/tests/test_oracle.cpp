#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "support.hpp"
#include "teamlab/errors.hpp"
#include "teamlab/oracle.hpp"

using namespace teamlab;

namespace {

// agents' cells plus the signal, encoded the way the model documents it
std::size_t encode(const JointModel& m, std::vector<int> cells, int signal) {
  return m.encode_state(JointState{std::move(cells), signal});
}

std::size_t action(const JointModel& m, std::vector<int> acts) {
  return m.encode_action(JointAction{std::move(acts)});
}

}  // namespace

TEST_CASE("joint model: sizes and encoding") {
  CHECK(build_joint_model(SignalLayout::kTwoStates, 1).num_states() == 4);
  auto two = build_joint_model(SignalLayout::kTwoStates, 2);
  CHECK(two.num_states() == 8);
  CHECK(two.num_joint_actions() == 4);
  CHECK(build_joint_model(SignalLayout::kFourStates, 2).num_states() == 32);
  CHECK_THROWS_AS(build_joint_model(SignalLayout::kTwoStates, 9), CapacityError);
  CHECK_THROWS_AS(build_joint_model(SignalLayout::kFourStates, 5), CapacityError);

  for (std::size_t s = 0; s < two.num_states(); ++s) CHECK(two.encode_state(two.decode_state(s)) == s);
  for (std::size_t a = 0; a < two.num_joint_actions(); ++a)
    CHECK(two.encode_action(two.decode_action(a)) == a);
}

TEST_CASE("joint model: transition rows are distributions and match the game") {
  Rng rng(7);
  for (auto [layout, n] : {std::pair{SignalLayout::kTwoStates, 3}, std::pair{SignalLayout::kFourStates, 2}}) {
    auto m = build_joint_model(layout, n);
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      for (std::size_t a = 0; a < m.num_joint_actions(); ++a) {
        double total = 0.0;
        for (auto [next, p] : m.transition_row(s, a)) total += p;
        CHECK(std::abs(total - 1.0) < 1e-12);
      }
    }
    // every outcome agrees with the game's own resolve()
    const auto& game = m.game();
    for (std::size_t s = 0; s < m.num_states(); s += 3) {
      for (std::size_t a = 0; a < m.num_joint_actions(); a += 2) {
        const auto js = m.decode_state(s);
        for (const auto& o : m.outcomes(s, a)) {
          const auto landed = m.decode_state(o.next).per_agent;
          auto t = game.resolve(js, landed);
          CHECK(m.encode_state(t.next) == o.next);
          CHECK(o.team_reward == doctest::Approx(testsupport::sum(t.env_rewards) / n));
        }
      }
    }
  }
}

TEST_CASE("value iteration: optimal long-run averages") {
  for (int n = 1; n <= 4; ++n) {
    auto m = build_joint_model(SignalLayout::kTwoStates, n);
    auto sol = value_iterate(m);
    const double expected = n == 1 ? 0.5 : (n - 1.0) / n;
    CHECK(std::abs(sol.gain - expected) < 1e-9);
    for (double g : sol.state_gain) CHECK(std::abs(g - expected) < 1e-9);
  }
  auto scaled = build_joint_model(SignalLayout::kTwoStates, 3, 2.5);
  CHECK(std::abs(value_iterate(scaled).gain - 2.5 * 2 / 3) < 1e-9);

  auto d = value_iterate(build_joint_model(SignalLayout::kTwoStates, 2),
                         {Criterion::kDiscounted, 0.9});
  CHECK(d.residual < 1e-9);
  for (double v : d.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 / (1 - 0.9) + 1e-9);
  }
  CHECK_THROWS_AS(value_iterate(build_joint_model(SignalLayout::kTwoStates, 1),
                                {Criterion::kDiscounted, 1.0}),
                  DomainError);
}

TEST_CASE("value iteration: four states gain is positive and at most the two-state bound") {
  for (int n : {1, 2}) {
    auto sol = value_iterate(build_joint_model(SignalLayout::kFourStates, n));
    const double bound = n == 1 ? 0.5 : (n - 1.0) / n;
    CHECK(sol.gain > 0.0);
    CHECK(sol.gain <= bound + 1e-9);
  }
}

TEST_CASE("zero-reward model has zero values") {
  auto m = build_joint_model(SignalLayout::kTwoStates, 2);
  // staying put with nobody on s_c never pays: evaluate that joint policy
  std::vector<std::vector<int>> stay(2, std::vector<int>{two_states_action::kStay, two_states_action::kStay});
  auto policy = joint_policy_from_individual(m, stay);
  const auto from = encode(m, {cell::kReward, cell::kReward}, 0);
  CHECK(evaluate_average_gain(m, policy)[from] == 0.0);
}

TEST_CASE("two agents: optimal policy classes") {
  auto m = build_joint_model(SignalLayout::kTwoStates, 2);
  const double g = value_iterate(m).gain;
  auto optimal = enumerate_optimal_joint_policies(m, g);
  CHECK(optimal.size() == 26112);

  using namespace two_states_action;
  const auto sc = cell::kSignal, sr = cell::kReward;
  // alternate from opposite cells: both move
  {
    std::vector<std::size_t> states{encode(m, {sc, sr}, 1), encode(m, {sr, sc}, 1)};
    std::vector<std::size_t> acts{action(m, {kMove, kMove}), action(m, {kMove, kMove})};
    CHECK(contains_behaviour(optimal, states, acts));
  }
  // one parks on s_c, the other on s_r
  {
    std::vector<std::size_t> states{encode(m, {sc, sr}, 1)};
    std::vector<std::size_t> acts{action(m, {kStay, kStay})};
    CHECK(contains_behaviour(optimal, states, acts));
  }
  // both stay on s_c forever
  {
    std::vector<std::size_t> states{encode(m, {sc, sc}, 1)};
    std::vector<std::size_t> acts{action(m, {kStay, kStay})};
    CHECK_FALSE(contains_behaviour(optimal, states, acts));
    std::vector<std::vector<int>> park(2, std::vector<int>{kStay, kStay});
    auto policy = joint_policy_from_individual(m, park);
    CHECK(evaluate_average_gain(m, policy)[states[0]] == 0.0);
    auto cyc = deterministic_cycle(m, policy, states[0]);
    CHECK(cyc.gain == 0.0);
    CHECK(cyc.states.size() == 1);
  }
  for (std::size_t k = 0; k < optimal.size(); k += 997)
    for (double v : evaluate_average_gain(m, optimal[k])) CHECK(std::abs(v - g) < 1e-9);

  CHECK_THROWS_AS(enumerate_optimal_joint_policies(build_joint_model(SignalLayout::kTwoStates, 3), 2.0 / 3),
                  ConfigError);
}

TEST_CASE("property: oracle and simulator agree on the optimal policy") {
  Rng rng(derive_seed(testsupport::master_seed(), 97));
  for (int n = 1; n <= 3; ++n) {
    auto m = build_joint_model(SignalLayout::kTwoStates, n);
    auto sol = value_iterate(m);
    const auto& game = m.game();
    auto state = game.initial_state(rng);
    double total = 0.0;
    const int burn = 20, steps = 6000;
    for (int t = 0; t < burn + steps; ++t) {
      const auto joint = m.decode_action(sol.policy[m.encode_state(state)]);
      auto tr = game.step(state, joint, rng);
      if (t >= burn) total += testsupport::sum(tr.env_rewards) / n;
      state = tr.next;
    }
    // the cycle length divides 6000 for n <= 3, so the replay hits the gain exactly
    CHECK(std::abs(total / steps - sol.gain) < 1e-6);
  }
}

TEST_CASE("teammate-in-reward-state probability") {
  CHECK(theorem1_probability(0.5, 2) == 0.5);
  CHECK(std::abs(theorem1_probability(0.5, 3) - 0.75) <= 1e-15);
  CHECK(theorem1_probability(0.3, 1) == 0.0);
  for (double z : {0.1, 0.5, 0.9})
    for (int n = 1; n < 14; ++n) CHECK(theorem1_probability(z, n + 1) > theorem1_probability(z, n));
  CHECK_THROWS_AS(theorem1_probability(1.0, 2), DomainError);
  CHECK_THROWS_AS(theorem1_probability(0.5, 0), DomainError);
}

TEST_CASE("stationary occupancy under the uniform policy") {
  auto game = SignalGame::two_states(1);
  auto policy = uniform_random_policy(2, 2);
  auto pi = per_agent_stationary(game, policy);
  CHECK(std::abs(pi[0] - 0.5) < 1e-12);
  CHECK(std::abs(stationary_zeta(game) - 0.5) < 1e-12);

  // four states: iterate the cell chain by hand
  auto four = SignalGame::four_states(1);
  auto uni4 = uniform_random_policy(4, 4);
  std::vector<double> p(4, 0.0);
  p[0] = 1.0;
  for (int it = 0; it < 500; ++it) {
    std::vector<double> q(4, 0.0);
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 4; ++a) {
        auto land = four.landing_distribution(s, a);
        for (int x = 0; x < 4; ++x) q[x] += p[s] * 0.25 * land[x];
      }
    p = q;
  }
  auto got = per_agent_stationary(four, uni4);
  CHECK(testsupport::l1(got, p) < 1e-10);
}

TEST_CASE("property: teammate probability, monte carlo vs closed form") {
  Rng rng(derive_seed(testsupport::master_seed(), 101));
  const double zeta = stationary_zeta(SignalGame::two_states(1));
  auto one = mc_teammate_in_reward_state(SignalLayout::kTwoStates, 1, 2000, rng);
  CHECK(one.probability == 0.0);
  double previous = 0.0;
  for (int n : {2, 3, 5}) {
    auto est = mc_teammate_in_reward_state(SignalLayout::kTwoStates, n, 50'000, rng);
    CHECK(est.events >= 50'000);
    const double expect = theorem1_probability(zeta, n);
    INFO("n=" << n << " mc=" << est.probability << " se=" << est.std_error);
    CHECK(std::abs(est.probability - expect) <= 3 * est.std_error);
    CHECK(est.probability >= previous - 3 * est.std_error);
    CHECK(est.reward_bearing <= est.probability);
    previous = est.probability;
  }
}

TEST_CASE("property: team reward at s_c entries shrinks with team size") {
  Rng rng(derive_seed(testsupport::master_seed(), 103));
  std::vector<int> sizes{1, 2, 4, 8, 16, 32};
  auto curve = team_reward_variance_curve(SignalLayout::kTwoStates, sizes, 40'000, rng);
  REQUIRE(curve.size() == sizes.size());
  CHECK(curve[0].variance == 0.0);
  CHECK(curve[0].mean == 0.0);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].mean > 0.0);
    CHECK(curve[i].mean >= curve[i - 1].mean - 3 * std::hypot(curve[i].mean_se, curve[i - 1].mean_se));
    if (i >= 2) CHECK(curve[i].variance < curve[i - 1].variance);
    CHECK(curve[i].variance <= 5 * curve[i].iid_oracle);
    CHECK(curve[i].variance >= curve[i].iid_oracle / 5);
  }
  CHECK(curve.back().variance < 0.2 * curve[1].variance);
}

TEST_CASE("gaussian reward entropy") {
  using std::numbers::pi;
  CHECK(std::abs(gaussian_reward_entropy(1 / (2 * pi)) - 0.5) <= 1e-15);
  CHECK(gaussian_reward_entropy(std::numbers::e / (2 * pi)) == doctest::Approx(1.0).epsilon(1e-14));
  for (double v : {0.01, 0.3, 2.0})
    CHECK(gaussian_reward_entropy(v) - gaussian_reward_entropy(v / 2) ==
          doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
  double last = -1e300;
  for (double v = 1e-4; v < 10; v *= 1.7) {
    CHECK(gaussian_reward_entropy(v) > last);
    last = gaussian_reward_entropy(v);
  }
  CHECK_THROWS_AS(gaussian_reward_entropy(0.0), DomainError);
}
