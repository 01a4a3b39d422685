#include <cmath>

#include "doctest.h"
#include "offrl/instances.hpp"
#include "offrl/mdp.hpp"
#include "oracles.hpp"

using namespace offrl;

namespace {

LayeredMDP random_three_layer(std::uint64_t seed, bool bernoulli = false) {
  Rng rng(seed);
  RandomMdpSpec spec;
  spec.layer_sizes = {1, 2, 3};
  spec.bernoulli_rewards = bernoulli;
  return random_mdp(spec, rng);
}

}  // namespace

TEST_CASE("one-step bandit") {
  LayeredMDP m({{0}}, {2});
  m.set_reward(0, 0, 1.0);
  m.set_reward(0, 1, 0.0);
  const auto sol = solve_optimal(m, Regularizer::none());
  CHECK(sol.q == SATable{1.0, 0.0});
  CHECK(sol.v[0] == 1.0);
  CHECK(sol.policy == Policy{1.0, 0.0});
  const auto occ = occupancy(m, sol.policy);
  CHECK(occ.d_state[0] == 1.0);
  CHECK(occ.d == SATable{1.0, 0.0});
  CHECK(coverage_coefficient(m, sol.policy, DataDistribution{0.5, 0.5}) == 2.0);
}

TEST_CASE("optimal value matches brute-force enumeration") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto m = random_three_layer(seed);
    REQUIRE(m.num_states() == 6);
    const auto sol = solve_optimal(m, Regularizer::none());
    CHECK(sol.j == doctest::Approx(oracle::brute_force_optimum(m)).epsilon(1e-12));
    CHECK(policy_evaluation(m, Regularizer::none(), sol.policy).j == doctest::Approx(sol.j).epsilon(1e-12));
    CHECK(bellman_residual(m, Regularizer::none(), sol) < 1e-12);
  }
}

TEST_CASE("regularized solutions are consistent") {
  Rng rng(4);
  for (const auto& reg : {Regularizer::shannon(0.5), Regularizer::tsallis(1.0, 0.3), Regularizer::log_barrier(0.7)}) {
    const auto m = random_three_layer(9);
    const auto sol = solve_optimal(m, reg);
    CHECK(bellman_residual(m, reg, sol) < 1e-9);
    CHECK(policy_evaluation(m, reg, sol.policy).j == doctest::Approx(sol.j).epsilon(1e-10));
    // Any other policy does worse.
    for (int t = 0; t < 10; ++t) CHECK(policy_evaluation(m, reg, random_policy(m, rng)).j <= sol.j + 1e-12);
  }
}

TEST_CASE("policy evaluation agrees with simulated returns") {
  const auto m = random_three_layer(21, true);
  Rng rng(8);
  const Policy pi = random_policy(m, rng);
  const double j = policy_evaluation(m, Regularizer::none(), pi).j;
  CHECK(j == doctest::Approx(oracle::policy_value(m, pi)).epsilon(1e-12));
  const auto [mean, se] = oracle::rollout_mean(m, pi, 200000, 99);
  CHECK(std::abs(mean - j) <= 3.0 * se);
}

TEST_CASE("occupancy") {
  SUBCASE("deterministic chain visits each state once") {
    LayeredMDP m({{0}, {1}, {2}}, {1, 1, 1});
    m.set_transition(0, 0, {{1, 1.0}});
    m.set_transition(1, 0, {{2, 1.0}});
    const auto occ = occupancy(m, uniform_policy(m));
    CHECK(occ.d_state == std::vector<double>{1.0, 1.0, 1.0});
  }
  SUBCASE("matches empirical visitation") {
    const auto m = random_three_layer(31);
    Rng rng(2);
    const Policy pi = random_policy(m, rng);
    const auto occ = occupancy(m, pi);
    for (int h = 0; h < m.horizon(); ++h) {
      double total = 0.0;
      for (int s : m.layer(h)) total += occ.d_state[s];
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    const int episodes = 100000;
    std::vector<double> counts(static_cast<std::size_t>(m.num_state_actions()), 0.0);
    for (int e = 0; e < episodes; ++e) {
      int s = m.initial_state();
      while (true) {
        const int a = rng.categorical(m.row(pi, s));
        counts[m.sa(s, a)] += 1.0;
        const auto row = m.next(s, a);
        if (row.empty()) break;
        std::vector<double> w;
        for (const auto& nx : row) w.push_back(nx.prob);
        s = row[rng.categorical(w)].state;
      }
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double p = occ.d[i];
      const double se = std::sqrt(p * (1.0 - p) / episodes);
      CHECK(std::abs(counts[i] / episodes - p) <= 4.0 * se + 1e-12);
    }
  }
}

TEST_CASE("coverage coefficient") {
  const auto m = random_three_layer(41);
  Rng rng(1);
  const Policy pi = random_policy(m, rng);
  const auto occ = occupancy(m, pi);
  DataDistribution mu = occ.d;
  for (double& x : mu) x /= m.horizon();
  CHECK(coverage_coefficient(m, pi, mu) == doctest::Approx(1.0).epsilon(1e-12));
  mu[0] = 0.0;
  CHECK(is_unbounded(coverage_coefficient(m, pi, mu)));
}

TEST_CASE("Bellman operator") {
  const auto m = random_three_layer(51);
  SUBCASE("optimal Q is a fixed point") {
    for (const auto& reg : {Regularizer::none(), Regularizer::shannon(0.4)}) {
      const auto sol = solve_optimal(m, reg);
      CHECK(sup_distance(bellman_apply(m, reg, sol.q), sol.q) < 1e-9);
    }
  }
  SUBCASE("matches direct summation") {
    Rng rng(3);
    const auto f = random_function(m, 0.0, 3.0, rng);
    const double alpha = 0.6;
    const auto reg = Regularizer::shannon(alpha);
    const auto hard = bellman_apply(m, Regularizer::none(), f);
    const auto soft = bellman_apply(m, reg, f);
    for (int s = 0; s < m.num_states(); ++s) {
      for (int a = 0; a < m.num_actions(s); ++a) {
        double h = m.reward(s, a), g = m.reward(s, a);
        for (const auto& nx : m.next(s, a)) {
          double best = -1e300, z = 0.0;
          const int k = m.num_actions(nx.state);
          for (int b = 0; b < k; ++b) {
            best = std::max(best, f[m.sa(nx.state, b)]);
            z += std::exp(f[m.sa(nx.state, b)] / alpha) / k;
          }
          h += nx.prob * best;
          g += nx.prob * alpha * std::log(z);
        }
        CHECK(hard[m.sa(s, a)] == doctest::Approx(h).epsilon(1e-12));
        CHECK(soft[m.sa(s, a)] == doctest::Approx(g).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("structural validation names the failing pair") {
  LayeredMDP m({{0}, {1, 2}}, {2, 1, 1});
  m.set_transition(0, 0, {{1, 0.5}, {2, 0.4}});
  m.set_transition(0, 1, {{2, 1.0}});
  const auto findings = m.validate();
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].find("(s=0, a=0)") != std::string::npos);
  CHECK(findings[0].find("0.9") != std::string::npos);
  CHECK_THROWS_AS(m.check(), ValidationError);

  LayeredMDP r({{0}}, {1});
  r.set_reward(0, 0, 1.5);
  CHECK(r.validate().size() == 1);
  r.set_extended_reward_range(true);
  CHECK(r.validate().empty());
}
