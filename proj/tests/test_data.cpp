#include <cmath>

#include "doctest.h"
#include "offrl/data.hpp"
#include "offrl/instances.hpp"

using namespace offrl;

namespace {

LayeredMDP small_mdp(std::uint64_t seed, bool bernoulli) {
  Rng rng(seed);
  RandomMdpSpec spec;
  spec.layer_sizes = {1, 2, 2};
  spec.bernoulli_rewards = bernoulli;
  return random_mdp(spec, rng);
}

}  // namespace

TEST_CASE("offline sampling") {
  const auto m = small_mdp(1, false);
  Rng rng(5);
  const auto mu = random_distribution(m, rng);
  CHECK(sample_dataset(m, mu, 0, 1).empty());

  const std::size_t n = 100000;
  const auto data = sample_dataset(m, mu, n, 42);
  REQUIRE(data.size() == n);
  std::vector<double> counts(mu.size(), 0.0);
  for (const auto& t : data.tuples) {
    CHECK_MESSAGE(t.r == m.reward(t.s, t.a), "deterministic rewards are reproduced exactly");
    counts[m.sa(t.s, t.a)] += 1.0;
  }
  for (std::size_t i = 0; i < mu.size(); ++i) {
    CHECK(std::abs(counts[i] / n - mu[i]) <= 3.0 * std::sqrt(mu[i] * (1.0 - mu[i]) / n));
  }
  const auto again = sample_dataset(m, mu, 1000, 42);
  CHECK(std::equal(again.tuples.begin(), again.tuples.end(), data.tuples.begin()));
  CHECK_FALSE(sample_dataset(m, mu, 1000, 43).tuples == again.tuples);
}

TEST_CASE("double policy sampling") {
  SUBCASE("deterministic policy on deterministic dynamics repeats the tuple") {
    LayeredMDP m({{0}, {1, 2}}, {2, 1, 1});
    m.set_transition(0, 0, {{1, 1.0}});
    m.set_transition(0, 1, {{2, 1.0}});
    m.set_reward(1, 0, 0.3);
    PolicyMixture mix{{deterministic_policy(m, {1, 0, 0})}, {1.0}};
    // Slot layers are drawn independently, so compare only same-layer pairs.
    const auto pairs = sample_double_policy_dataset(m, mix, 500, 7);
    int same_layer = 0;
    for (const auto& [x, y] : pairs.pairs) {
      if (m.layer_of(x.s) != m.layer_of(y.s)) continue;
      ++same_layer;
      CHECK(x == y);
    }
    CHECK(same_layer > 100);
  }
  SUBCASE("slot marginal and independence") {
    const auto m = small_mdp(3, true);
    Rng rng(9);
    PolicyMixture mix{{random_policy(m, rng), random_policy(m, rng)}, {0.3, 0.7}};
    std::vector<double> expected(static_cast<std::size_t>(m.num_state_actions()), 0.0);
    for (std::size_t k = 0; k < mix.policies.size(); ++k) {
      const auto d = occupancy_distribution(m, mix.policies[k]);
      for (std::size_t i = 0; i < d.size(); ++i) expected[i] += mix.weights[k] * d[i];
    }
    const std::size_t n = 100000;
    const auto pairs = sample_double_policy_dataset(m, mix, n, 11);
    std::vector<double> counts(expected.size(), 0.0);
    for (const auto& pr : pairs.pairs) counts[m.sa(pr.first.s, pr.first.a)] += 1.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      CHECK(std::abs(counts[i] / n - expected[i]) <= 4.0 * std::sqrt(expected[i] * (1 - expected[i]) / n));
    }
    // Rewards of the two slots are uncorrelated given the drawn policy.
    for (int k = 0; k < 2; ++k) {
      double c = 0, sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs.policy_index[i] != k) continue;
        const double x = pairs.pairs[i].first.r, y = pairs.pairs[i].second.r;
        c += 1;
        sx += x;
        sy += y;
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
      }
      const double cov = sxy / c - (sx / c) * (sy / c);
      const double vx = sxx / c - (sx / c) * (sx / c), vy = syy / c - (sy / c) * (sy / c);
      CHECK(std::abs(cov) <= 3.0 * std::sqrt(vx * vy / c));
    }
  }
}

TEST_CASE("exact weights reproduce the occupancy") {
  const auto m = small_mdp(5, false);
  Rng rng(2);
  const auto mu = random_distribution(m, rng);
  const Policy pi = random_policy(m, rng);
  const auto w = exact_weight(m, pi, mu);
  const auto d = occupancy(m, pi).d;
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(w[i] * m.horizon() * mu[i] == doctest::Approx(d[i]).epsilon(1e-12));
}

TEST_CASE("policy feature coverage") {
  LayeredMDP m({{0}}, {3});
  const Policy a0 = deterministic_policy(m, {0});
  const Policy a1 = deterministic_policy(m, {1});
  const Policy a2 = deterministic_policy(m, {2});
  CHECK(policy_feature_coverage(m, {{a0}, {1.0}}, a0) == doctest::Approx(1.0));
  CHECK(policy_feature_coverage(m, {{a0, a1}, {0.5, 0.5}}, a0) == doctest::Approx(2.0));
  CHECK(is_unbounded(policy_feature_coverage(m, {{a0, a1}, {0.5, 0.5}}, a2)));
}

TEST_CASE("distribution validation") {
  const auto m = small_mdp(1, false);
  DataDistribution mu(static_cast<std::size_t>(m.num_state_actions()), 0.2);
  CHECK_FALSE(validate_distribution(m, mu).empty());
  mu.assign(mu.size(), 1.0 / mu.size());
  CHECK(validate_distribution(m, mu).empty());
}
