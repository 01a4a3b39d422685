#include <cmath>
#include <numeric>

#include "doctest.h"
#include "offrl/estimation.hpp"
#include "offrl/instances.hpp"

using namespace offrl;

namespace {

// Unregularized max_a f(s, a), written out independently of the library.
double greedy_value(const LayeredMDP& m, const QFunction& f, int s) {
  if (s < 0) return 0.0;
  double best = -1e300;
  for (int a = 0; a < m.num_actions(s); ++a) best = std::max(best, f[m.sa(s, a)]);
  return best;
}

// (E_{d^pi}[f - r - f(s')])^2 summed over layers.
double squared_average_residual(const LayeredMDP& m, const Policy& pi, const QFunction& f) {
  const auto d = occupancy(m, pi).d;
  double total = 0.0;
  for (int s = 0; s < m.num_states(); ++s) {
    for (int a = 0; a < m.num_actions(s); ++a) {
      double next = 0.0;
      for (const auto& nx : m.next(s, a)) next += nx.prob * greedy_value(m, f, nx.state);
      total += d[m.sa(s, a)] * (f[m.sa(s, a)] - m.reward(s, a) - next);
    }
  }
  return total * total;
}

}  // namespace

TEST_CASE("statistical thresholds") {
  CHECK(eps_bc(2, 4, 4, 0.1, 1000) == doctest::Approx(8.0 * std::log(160.0) / 1000.0).epsilon(1e-14));
  CHECK(eps_bc(2, 4, 4, 0.1, 1000) == doctest::Approx(0.040601).epsilon(1e-4));
  CHECK(eps_wr(2.0, 2, 4, 2, 0.1, 400) == doctest::Approx(4.0 * std::sqrt(2.0 * std::log(80.0) / 400.0)).epsilon(1e-14));
  CHECK(eps_wr(2.0, 2, 4, 2, 0.1, 400) == doctest::Approx(0.5921).epsilon(1e-3));
  CHECK(eps_br(2, 4, 0.2, 800) == doctest::Approx(2.0 * std::sqrt(std::log(40.0) / 1600.0)).epsilon(1e-14));
  CHECK(eps_br(2, 4, 0.2, 800) == doctest::Approx(0.09601).epsilon(1e-3));
}

TEST_CASE("losses on hand-built data") {
  LayeredMDP m({{0}, {1}}, {2, 2});
  m.set_transition(0, 0, {{1, 1.0}});
  m.set_transition(0, 1, {{1, 1.0}});
  const auto reg = Regularizer::none();
  OfflineDataset data;
  data.tuples = {{0, 0, 0.0, 1}};
  // g(s,a) = 2, f(s') = max(1, 0) = 1: (2 - 0 - 1)^2 = 1.
  const QFunction g{2.0, 0.0, 0.0, 0.0};
  const QFunction f{0.0, 0.0, 1.0, 0.0};
  CHECK(loss_bc(m, data, g, f, reg) == doctest::Approx(1.0));
  CHECK(loss_wr(m, data, SATable(4, 0.0), f, reg) == 0.0);

  DoubleSampleDataset pairs;
  pairs.pairs = {{{0, 0, 0.0, 1}, {0, 1, 0.0, 1}}};
  // Residuals f(s,a) - r - f(s'): (3 - 1, 4 - 1).
  const QFunction h{3.0, 4.0, 1.0, 0.0};
  CHECK(loss_br(m, pairs, h, reg) == doctest::Approx(6.0));
  CHECK_THROWS_AS(loss_bc(m, OfflineDataset{}, g, f, reg), DomainError);
}

TEST_CASE("losses match direct summation") {
  Rng rng(3);
  RandomMdpSpec spec;
  spec.layer_sizes = {1, 3, 2};
  spec.max_actions = 3;
  const auto m = random_mdp(spec, rng);
  const auto mu = random_distribution(m, rng);
  const auto data = sample_dataset(m, mu, 500, 17);
  const auto reg = Regularizer::none();
  for (int t = 0; t < 10; ++t) {
    const auto f = random_function(m, 0.0, 3.0, rng);
    const auto g = random_function(m, 0.0, 3.0, rng);
    SATable w(f.size());
    for (double& x : w) x = rng.uniform() * 2.0 - 1.0;
    double sq = 0.0, lin = 0.0;
    for (const auto& tr : data.tuples) {
      const double y = tr.r + greedy_value(m, f, tr.next);
      sq += std::pow(g[m.sa(tr.s, tr.a)] - y, 2);
      lin += w[m.sa(tr.s, tr.a)] * (f[m.sa(tr.s, tr.a)] - y);
    }
    CHECK(loss_bc(m, data, g, f, reg) == doctest::Approx(sq / data.size()).epsilon(1e-12));
    CHECK(loss_wr(m, data, w, f, reg) == doctest::Approx(std::abs(lin / data.size())).epsilon(1e-12));
  }
}

TEST_CASE("double-sample loss estimates the squared average residual") {
  SUBCASE("one layer") {
    LayeredMDP m({{0}}, {2});
    m.set_reward(0, 0, 0.3, RewardNoise::Bernoulli);
    m.set_reward(0, 1, 0.8, RewardNoise::Bernoulli);
    Rng rng(1);
    PolicyMixture mix{{random_policy(m, rng), random_policy(m, rng)}, {0.4, 0.6}};
    const QFunction f{0.9, 0.1};
    double expected = 0.0;
    for (std::size_t k = 0; k < 2; ++k) expected += mix.weights[k] * squared_average_residual(m, mix.policies[k], f);
    const auto pairs = sample_double_policy_dataset(m, mix, 200000, 5);
    CHECK(loss_br(m, pairs, f, Regularizer::none()) == doctest::Approx(expected).epsilon(0.03));
  }
  SUBCASE("several layers carry a 1/H^2 factor") {
    Rng rng(8);
    RandomMdpSpec spec;
    spec.layer_sizes = {1, 2, 2};
    spec.bernoulli_rewards = true;
    const auto m = random_mdp(spec, rng);
    PolicyMixture mix{{random_policy(m, rng), random_policy(m, rng), random_policy(m, rng)}, {0.2, 0.3, 0.5}};
    const auto f = random_function(m, 1.0, 2.5, rng);
    double expected = 0.0;
    for (std::size_t k = 0; k < 3; ++k) expected += mix.weights[k] * squared_average_residual(m, mix.policies[k], f);
    expected /= 9.0;
    const auto pairs = sample_double_policy_dataset(m, mix, 400000, 6);
    CHECK(loss_br(m, pairs, f, Regularizer::none()) == doctest::Approx(expected).epsilon(0.03));
  }
}

TEST_CASE("confidence sets") {
  const auto inst = confidence_canonical_instance();
  const auto& m = inst.mdp;
  const auto data = sample_dataset(m, inst.mu, 3000, 21);

  SUBCASE("singleton class keeps Q*") {
    FunctionClass only;
    only.add(inst.fclass.members[inst.truth], "q_star");
    FunctionClass g;
    g.add(bellman_apply(m, inst.reg, only.members[0]), "tq");
    const auto bc = build_conf_bc(m, data, only, g, inst.reg, 0.1);
    CHECK(bc.indices == std::vector<int>{0});
    CHECK(std::abs(bc.losses[0]) < 1e-12);
  }
  SUBCASE("zero weight keeps everything") {
    WeightClass zero;
    zero.members = {SATable(static_cast<std::size_t>(m.num_state_actions()), 0.0)};
    zero.names = {"zero"};
    const auto wr = build_conf_wr(m, data, inst.fclass, zero, inst.reg, 0.1);
    CHECK(wr.indices.size() == inst.fclass.size());
  }
  SUBCASE("bellman-consistent set contains the truth") {
    const auto bc = build_conf_bc(m, data, inst.fclass, inst.gclass, inst.reg, 0.1);
    CHECK(bc.contains(inst.truth));
    CHECK(bc.eps_stat == doctest::Approx(eps_bc(m.horizon(), inst.fclass.size(), inst.gclass.size(), 0.1, 3000)));
    CHECK(bc.losses.size() == inst.fclass.size());
    for (double l : bc.losses) CHECK(l >= -1e-12);
  }
  SUBCASE("a distant function is rejected by the double-sample test") {
    FunctionClass fc = inst.fclass;
    QFunction far = inst.fclass.members[inst.truth];
    for (double& x : far) x += 2.0;
    fc.add(far, "far");
    const auto pairs = sample_double_policy_dataset(m, inst.mixture, 5000, 4);
    const auto br = build_conf_br(m, pairs, fc, inst.reg, 0.1);
    CHECK_FALSE(br.contains(static_cast<int>(fc.size()) - 1));
    CHECK(br.contains(inst.truth));
  }
  SUBCASE("full set") {
    const auto all = full_confidence_set(inst.fclass);
    CHECK(all.indices.size() == inst.fclass.size());
    CHECK(is_unbounded(all.eps_stat));
  }
}

TEST_CASE("completeness") {
  const auto inst = confidence_canonical_instance();
  const auto map = completion_map(inst.mdp, inst.reg, inst.fclass, inst.gclass);
  for (std::size_t k = 0; k < map.size(); ++k) CHECK(map[k] == static_cast<int>(k));
  CHECK(verify_completeness(inst.mdp, inst.reg, inst.fclass, inst.gclass));
  CHECK_FALSE(verify_completeness(inst.mdp, inst.reg, inst.fclass, inst.fclass));
}

TEST_CASE("function class validation") {
  LayeredMDP m({{0}}, {2});
  FunctionClass fc;
  fc.add({1.0, 2.0}, "a");
  fc.add({1.0}, "a");
  fc.add({std::nan(""), 0.0}, "c");
  const auto findings = validate_function_class(m, fc);
  CHECK(findings.size() == 3);
  CHECK(fc.find("c") == 2);
  CHECK(fc.find("zzz") == -1);
}
