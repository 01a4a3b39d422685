#include <cmath>
#include <numeric>

#include "doctest.h"
#include "offrl/game.hpp"
#include "offrl/rng.hpp"
#include "oracles.hpp"

using namespace offrl;

namespace {

Matrix random_matrix(Rng& rng, int r, int c) {
  Matrix a(r, c);
  for (double& x : a.data) x = 2.0 * rng.uniform() - 1.0;
  return a;
}

// Duality gap recomputed from the returned mixtures.
double certified_gap(const Matrix& a, const GameSolution& sol) {
  double upper = -1e300, lower = 1e300;
  for (int i = 0; i < a.rows; ++i) {
    double r = 0.0;
    for (int j = 0; j < a.cols; ++j) r += a(i, j) * sol.col[j];
    upper = std::max(upper, r);
  }
  for (int j = 0; j < a.cols; ++j) {
    double c = 0.0;
    for (int i = 0; i < a.rows; ++i) c += sol.row[i] * a(i, j);
    lower = std::min(lower, c);
  }
  return upper - lower;
}

void check_mixture(const std::vector<double>& x) {
  CHECK(std::accumulate(x.begin(), x.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  for (double v : x) CHECK(v >= -1e-12);
}

}  // namespace

TEST_CASE("trivial and symmetric games") {
  const auto zero = solve_zero_sum(Matrix(1, 1, 0.0));
  CHECK(std::abs(zero.value) < 1e-12);

  Matrix rps(3, 3);
  const double t[3][3] = {{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) rps(i, j) = t[i][j];
  const auto sol = solve_zero_sum(rps);
  CHECK(std::abs(sol.value) < 1e-9);
  for (int i = 0; i < 3; ++i) {
    CHECK(sol.row[i] == doctest::Approx(1.0 / 3).epsilon(1e-7));
    CHECK(sol.col[i] == doctest::Approx(1.0 / 3).epsilon(1e-7));
  }
}

TEST_CASE("values match support enumeration") {
  Rng rng(2024);
  for (int t = 0; t < 60; ++t) {
    const int r = 1 + static_cast<int>(rng.below(6));
    const int c = 1 + static_cast<int>(rng.below(7));
    const Matrix a = random_matrix(rng, r, c);
    const auto sol = solve_zero_sum(a);
    CHECK(sol.value == doctest::Approx(oracle::game_value(a)).epsilon(1e-7));
    check_mixture(sol.row);
    check_mixture(sol.col);
    CHECK(certified_gap(a, sol) <= 1e-6);
  }
}

TEST_CASE("large games go through column generation") {
  Rng rng(77);
  const Matrix small = random_matrix(rng, 4, 6);
  const int copies = 150;
  Matrix big(4, 6 * copies);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < big.cols; ++j) big(i, j) = small(i, j % 6);
  const auto sol = solve_zero_sum(big);
  CHECK(sol.value == doctest::Approx(oracle::game_value(small)).epsilon(1e-7));
  CHECK(certified_gap(big, sol) <= 1e-6);

  const Matrix wide = random_matrix(rng, 5, 3000);
  const auto w = solve_zero_sum(wide);
  check_mixture(w.col);
  CHECK(certified_gap(wide, w) <= 1e-6);
}

TEST_CASE("bookkeeping and errors") {
  reset_game_stats();
  Rng rng(1);
  for (int t = 0; t < 5; ++t) solve_zero_sum(random_matrix(rng, 3, 3));
  CHECK(game_stats().solved == 5);
  CHECK(game_stats().max_gap <= 1e-6);
  Matrix bad(2, 2, 0.0);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(solve_zero_sum(bad), DomainError);
}
