#include <cmath>
#include <vector>

#include "doctest.h"
#include "offrl/regularizer.hpp"
#include "offrl/rng.hpp"
#include "oracles.hpp"

using namespace offrl;

namespace {

std::vector<double> random_simplex(Rng& rng, int k, double floor = 0.05) {
  std::vector<double> p(static_cast<std::size_t>(k));
  double total = 0.0;
  for (double& x : p) total += (x = rng.uniform() + floor);
  for (double& x : p) x /= total;
  return p;
}

Regularizer make(RegKind kind, double alpha, double q = 0.5) {
  switch (kind) {
    case RegKind::Shannon:
      return Regularizer::shannon(alpha);
    case RegKind::Tsallis:
      return Regularizer::tsallis(alpha, q);
    case RegKind::LogBarrier:
      return Regularizer::log_barrier(alpha);
    case RegKind::None:
      break;
  }
  return Regularizer::none();
}

}  // namespace

TEST_CASE("psi vanishes at the reference and KL to uniform is log 2") {
  const auto reg = Regularizer::shannon(1.0);
  const std::vector<double> half{0.5, 0.5};
  CHECK(psi_value(reg, half, 0) == doctest::Approx(0.0));
  const std::vector<double> vertex{1.0, 0.0};
  CHECK(psi_value(reg, vertex, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(kl_divergence(vertex, half) == doctest::Approx(std::log(2.0)));

  Rng rng(3);
  for (RegKind kind : {RegKind::Tsallis, RegKind::LogBarrier}) {
    Regularizer r = make(kind, 1.3);
    r.pi_ref = {random_simplex(rng, 4)};
    CHECK(std::abs(psi_value(r, r.pi_ref[0], 0)) < 1e-14);
  }
}

TEST_CASE("tsallis psi matches the gradient-form Bregman divergence") {
  Rng rng(5);
  Regularizer reg = Regularizer::tsallis(2.0, 0.5);
  for (int t = 0; t < 20; ++t) {
    const auto ref = random_simplex(rng, 3);
    const auto p = random_simplex(rng, 3);
    reg.pi_ref = {ref};
    // alpha * (Phi(p) - Phi(ref) - <grad Phi(ref), p - ref>) with Phi = (1 - sum x^q) / (1 - q).
    double phi_p = 1.0, phi_r = 1.0, lin = 0.0;
    for (int a = 0; a < 3; ++a) {
      phi_p -= std::sqrt(p[a]);
      phi_r -= std::sqrt(ref[a]);
      lin += -0.5 / 0.5 * std::pow(ref[a], -0.5) * (p[a] - ref[a]);
    }
    const double expected = 2.0 * (phi_p / 0.5 - phi_r / 0.5 - lin);
    CHECK(psi_value(reg, p, 0) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("Bregman divergence of psi") {
  Rng rng(7);
  SUBCASE("identity gives zero") {
    for (RegKind kind : {RegKind::Shannon, RegKind::Tsallis, RegKind::LogBarrier}) {
      const auto x = random_simplex(rng, 4);
      CHECK(std::abs(bregman(make(kind, 0.7), x, x, 0)) < 1e-14);
    }
  }
  SUBCASE("shannon equals alpha KL whatever the reference") {
    for (int t = 0; t < 20; ++t) {
      Regularizer reg = Regularizer::shannon(0.3 + rng.uniform());
      reg.pi_ref = {random_simplex(rng, 3)};
      const auto x = random_simplex(rng, 3);
      const auto y = random_simplex(rng, 3);
      double kl = 0.0;
      for (int a = 0; a < 3; ++a) kl += x[a] * std::log(x[a] / y[a]);
      CHECK(bregman(reg, x, y, 0) == doctest::Approx(reg.alpha * kl).epsilon(1e-12));
    }
  }
  SUBCASE("log-barrier dominates half of alpha KL") {
    for (int t = 0; t < 200; ++t) {
      const auto reg = Regularizer::log_barrier(0.2 + 2.0 * rng.uniform());
      const auto x = random_simplex(rng, 5, 0.01);
      const auto y = random_simplex(rng, 5, 0.01);
      CHECK(bregman(reg, x, y, 0) >= 0.5 * reg.alpha * kl_divergence(x, y) - 1e-12);
    }
  }
}

TEST_CASE("regularized argmax") {
  SUBCASE("constant payoff returns the reference") {
    Rng rng(11);
    for (RegKind kind : {RegKind::Shannon, RegKind::Tsallis, RegKind::LogBarrier}) {
      Regularizer reg = make(kind, 0.8);
      reg.pi_ref = {random_simplex(rng, 4)};
      const std::vector<double> q(4, 1.25);
      const auto res = regularized_argmax(reg, q, 0);
      for (int a = 0; a < 4; ++a) CHECK(res.p[a] == doctest::Approx(reg.pi_ref[0][a]).epsilon(1e-10));
      CHECK(res.value == doctest::Approx(1.25).epsilon(1e-12));
    }
  }
  SUBCASE("shannon with payoff (0, log 3) gives (1/4, 3/4)") {
    const auto res = regularized_argmax(Regularizer::shannon(1.0), std::vector<double>{0.0, std::log(3.0)}, 0);
    CHECK(res.p[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(res.p[1] == doctest::Approx(0.75).epsilon(1e-14));
    const auto numeric = oracle::numeric_argmax(RegKind::Shannon, 1.0, 0.5, {0.0, std::log(3.0)}, {0.5, 0.5});
    CHECK(numeric[0] == doctest::Approx(0.25).epsilon(1e-10));
  }
  SUBCASE("every kind agrees with the numeric maximization oracle") {
    Rng rng(13);
    for (int t = 0; t < 90; ++t) {
      const RegKind kind = t % 3 == 0 ? RegKind::Shannon : t % 3 == 1 ? RegKind::Tsallis : RegKind::LogBarrier;
      const int k = 2 + static_cast<int>(rng.below(5));
      Regularizer reg = make(kind, 0.2 + 2.0 * rng.uniform(), 0.2 + 0.6 * rng.uniform());
      reg.pi_ref = {random_simplex(rng, k)};
      std::vector<double> q(static_cast<std::size_t>(k));
      for (double& x : q) x = 3.0 * rng.uniform();
      const auto res = regularized_argmax(reg, q, 0);
      const auto ref = oracle::numeric_argmax(kind, reg.alpha, reg.tsallis_q, q, reg.pi_ref[0]);
      for (int a = 0; a < k; ++a) CHECK(res.p[a] == doctest::Approx(ref[a]).epsilon(1e-8));
      CHECK(res.value ==
            doctest::Approx(oracle::regularized_objective(kind, reg.alpha, reg.tsallis_q, q, reg.pi_ref[0], ref))
                .epsilon(1e-9));
      CHECK(stationarity_residual(reg, res.p, q, 0) <= 1e-10);
    }
  }
  SUBCASE("kind none is the greedy maximum") {
    const auto res = regularized_argmax(Regularizer::none(), std::vector<double>{0.2, 0.9, 0.4}, 0);
    CHECK(res.value == 0.9);
    CHECK(res.p[1] == 1.0);
  }
}

TEST_CASE("log-barrier greedy ratio bound") {
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    const int H = 1 + static_cast<int>(rng.below(4));
    const auto reg = Regularizer::log_barrier(0.1 + 3.0 * rng.uniform());
    std::vector<double> f1(4), f2(4);
    for (double& x : f1) x = H * rng.uniform();
    for (double& x : f2) x = H * rng.uniform();
    const auto p1 = regularized_argmax(reg, f1, 0).p;
    const auto p2 = regularized_argmax(reg, f2, 0).p;
    const double lo = reg.alpha / (reg.alpha + 2.0 * H);
    for (int a = 0; a < 4; ++a) {
      CHECK(p1[a] / p2[a] >= lo - 1e-12);
      CHECK(p1[a] / p2[a] <= 1.0 / lo + 1e-12);
    }
  }
}

TEST_CASE("regularity constants") {
  const auto s = psi_constants(Regularizer::shannon(1.0), 2);
  CHECK(s.c1 == 9.0);
  CHECK(s.c2 == 1.0);
  const auto lb = psi_constants(Regularizer::log_barrier(2.0), 2);
  CHECK(lb.c1 == 3.0);
  CHECK(lb.c2 == 1.0);
  const auto ts = psi_constants(Regularizer::tsallis(1.0, 0.5), 1);
  CHECK(ts.c1 == doctest::Approx(27.0));
  CHECK(ts.c2 == doctest::Approx(2.0));
  CHECK_THROWS_AS(psi_constants(Regularizer::none(), 1), DomainError);
}

TEST_CASE("regularizer validation") {
  std::vector<std::string> findings;
  Regularizer bad = Regularizer::tsallis(1.0, 1.5);
  bad.pi_ref = {{0.5, 0.6}};
  bad.validate(findings);
  CHECK(findings.size() == 2);
}
