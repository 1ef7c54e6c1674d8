#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "support.hpp"
#include "teamlab/core.hpp"
#include "teamlab/errors.hpp"
#include "teamlab/random.hpp"

using namespace teamlab;

TEST_CASE("team structure: contiguous blocks") {
  std::vector<int> two_pairs{2, 2};
  auto ts = TeamStructure::contiguous(4, two_pairs);
  REQUIRE(ts.team_count() == 2);
  CHECK(ts.teams()[0] == std::vector<std::size_t>{0, 1});
  CHECK(ts.teams()[1] == std::vector<std::size_t>{2, 3});
  CHECK(ts.same_team({0}, {1}));
  CHECK_FALSE(ts.same_team({1}, {2}));

  std::vector<int> one{3};
  auto single = TeamStructure::contiguous(3, one);
  CHECK(single.team_count() == 1);
  CHECK(single.team_size_of({2}) == 3);

  CHECK_THROWS_AS(TeamStructure::contiguous(5, two_pairs), ConfigError);
  std::vector<int> bad{2, 0};
  CHECK_THROWS_AS(TeamStructure::contiguous(2, bad), ConfigError);
  CHECK_THROWS_AS(TeamStructure::uniform(30, 4), ConfigError);
}

TEST_CASE("team structure: shuffled assignment is a seeded partition") {
  std::vector<int> sizes{3, 3, 4};
  auto a = TeamStructure::shuffled(10, sizes, 7);
  auto b = TeamStructure::shuffled(10, sizes, 7);
  CHECK(a.teams() == b.teams());
  std::vector<int> seen(10, 0);
  for (const auto& t : a.teams())
    for (auto m : t) ++seen[m];
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("team reward: mean sharing") {
  std::vector<int> pair{2};
  auto ts = TeamStructure::contiguous(2, pair);
  std::vector<double> r{0.0, 5.0};
  CHECK(team_reward(r, ts) == std::vector<double>{2.5, 2.5});

  auto singles = TeamStructure::uniform(2, 1);
  std::vector<double> r2{3.0, 7.0};
  CHECK(team_reward(r2, singles) == std::vector<double>{3.0, 7.0});

  const double rr = 1.7;
  auto trio = TeamStructure::uniform(3, 3);
  std::vector<double> r3{0.0, 0.0, rr};
  for (double x : team_reward(r3, trio)) CHECK(x == doctest::Approx(rr / 3).epsilon(1e-15));

  std::vector<double> wrong{1.0};
  CHECK_THROWS(team_reward(wrong, ts));
}

TEST_CASE("reward vector with a custom sharing rule") {
  auto ts = TeamStructure::uniform(2, 2);
  SharingRule keep = [](std::span<const double> r, const TeamStructure&) {
    return std::vector<double>(r.begin(), r.end());
  };
  auto rv = RewardVector::shared({1.0, 3.0}, ts, keep);
  CHECK(rv.team_rewards == std::vector<double>{1.0, 3.0});
  auto mean = RewardVector::shared({1.0, 3.0}, ts);
  CHECK(mean.team_rewards == std::vector<double>{2.0, 2.0});
}

TEST_CASE("discounted return") {
  std::vector<double> ones{1, 1, 1};
  CHECK(discounted_return(ones, 1.0) == 3.0);
  std::vector<double> late{0, 0, 5};
  CHECK(discounted_return(late, 0.5) == doctest::Approx(1.25));

  const double r = 0.8;
  const int H = 37;
  std::vector<double> flat(H, r);
  double oracle = 0.0, g = 1.0;
  for (int t = 0; t < H; ++t, g *= 0.9) oracle += r * g;
  CHECK(discounted_return(flat, 0.9) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(discounted_return(flat, 0.9) == doctest::Approx(r * (1 - std::pow(0.9, H)) / 0.1).epsilon(1e-12));

  CHECK(discounted_return(late, 0.5, 2) == 5.0);
  CHECK_THROWS_AS(discounted_return(late, 0.0), DomainError);
}

TEST_CASE("trajectory log indexing") {
  auto ts = TeamStructure::uniform(2, 2);
  TrajectoryLog log(0.9, 2);
  auto step = [&](int k) {
    JointState s{{k % 2, 1 - k % 2}, 0};
    log.append(s, JointAction{{0, 1}}, RewardVector::shared({double(k), 0.0}, ts), s);
  };
  step(0);
  CHECK(log.horizon() == 1);
  for (int k = 1; k < 6; ++k) step(k);
  const std::size_t H = log.horizon();
  CHECK(H == 6);
  CHECK(log.prefix(3).size() == 3);  // steps 1..t-1 for t = 4
  CHECK(log.exclude(2).size() == H - 1);
  auto tr = log.team_rewards_of({1});
  REQUIRE(tr.size() == H);
  CHECK(tr[4] == 2.0);
  CHECK_THROWS(log.exclude(H));
}

TEST_CASE("property: conservation, constancy and singleton neutrality") {
  Rng rng(derive_seed(testsupport::master_seed(), 11));
  std::uniform_real_distribution<double> u(-3.0, 7.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int pop = 2 + uniform_index(rng, 20);
    std::vector<int> sizes;
    for (int left = pop; left > 0;) {
      int s = 1 + uniform_index(rng, std::min(left, 5));
      sizes.push_back(s);
      left -= s;
    }
    auto ts = TeamStructure::shuffled(pop, sizes, rng());
    std::vector<double> env(pop);
    for (auto& x : env) x = u(rng);
    auto tr = team_reward(env, ts);
    CHECK(testsupport::sum(tr) == doctest::Approx(testsupport::sum(env)).epsilon(1e-12));
    for (const auto& team : ts.teams())
      for (auto m : team) CHECK(tr[m] == tr[team.front()]);

    auto singles = TeamStructure::uniform(pop, 1);
    CHECK(team_reward(env, singles) == env);
  }
}
