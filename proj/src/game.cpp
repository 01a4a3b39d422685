#include "offrl/game.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "offrl/common.hpp"

namespace offrl {

namespace {

constexpr double kPivotEps = 1e-12;

std::atomic<long long> g_solved{0};
std::atomic<double> g_max_gap{0.0};

void record(double gap) {
  ++g_solved;
  double seen = g_max_gap.load();
  while (gap > seen && !g_max_gap.compare_exchange_weak(seen, gap)) {
  }
}

// Solves max 1^T z s.t. B z <= 1, z >= 0 for strictly positive B with a dense
// tableau. Returns z and the dual multipliers w of the row constraints.
struct LpResult {
  std::vector<double> z;
  std::vector<double> w;
};

LpResult simplex_positive(const Matrix& b) {
  const int m = b.rows;
  const int n = b.cols;
  const int width = n + m + 1;  // structural, slack, rhs
  std::vector<double> t(static_cast<std::size_t>(m + 1) * width, 0.0);
  auto at = [&](int i, int j) -> double& { return t[static_cast<std::size_t>(i) * width + j]; };
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) at(i, j) = b(i, j);
    at(i, n + i) = 1.0;
    at(i, width - 1) = 1.0;
  }
  for (int j = 0; j < n; ++j) at(m, j) = -1.0;
  std::vector<int> basis(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  const int max_pivots = 50 * (m + n) + 1000;
  int degenerate_run = 0;
  for (int pivots = 0;; ++pivots) {
    if (pivots > max_pivots) throw SolverError("simplex: pivot limit reached");
    // Dantzig pricing, falling back to Bland's rule after degenerate pivots.
    const bool bland = degenerate_run > 50;
    int enter = -1;
    double best = -kPivotEps;
    for (int j = 0; j < n + m; ++j) {
      const double rc = at(m, j);
      if (rc < best) {
        enter = j;
        if (bland) break;
        best = rc;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double a = at(i, enter);
      if (a <= kPivotEps) continue;
      const double r = at(i, width - 1) / a;
      if (r < ratio - 1e-15 || (r <= ratio + 1e-15 && leave >= 0 && basis[i] < basis[leave])) {
        ratio = std::min(ratio, r);
        leave = i;
      }
    }
    if (leave < 0) throw SolverError("simplex: unbounded direction");
    degenerate_run = ratio <= 1e-15 ? degenerate_run + 1 : 0;
    const double piv = at(leave, enter);
    for (int j = 0; j < width; ++j) at(leave, j) /= piv;
    for (int i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double factor = at(i, enter);
      if (factor == 0.0) continue;
      for (int j = 0; j < width; ++j) at(i, j) -= factor * at(leave, j);
    }
    basis[leave] = enter;
  }
  LpResult res;
  res.z.assign(static_cast<std::size_t>(n), 0.0);
  res.w.assign(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) res.z[basis[i]] = std::max(0.0, at(i, width - 1));
  }
  for (int i = 0; i < m; ++i) res.w[i] = std::max(0.0, at(m, n + i));
  return res;
}

void normalize(std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  if (total <= 0.0) throw SolverError("game solver: degenerate mixture");
  for (double& x : v) x /= total;
}

GameSolution finish(const Matrix& a, std::vector<double> row, std::vector<double> col) {
  GameSolution sol;
  sol.row = std::move(row);
  sol.col = std::move(col);
  const auto rp = row_payoffs(a, sol.col);
  const auto cp = col_payoffs(a, sol.row);
  sol.value = *std::max_element(rp.begin(), rp.end());
  sol.gap = sol.value - *std::min_element(cp.begin(), cp.end());
  return sol;
}

GameSolution solve_dense(const Matrix& a) {
  const auto [lo, hi] = std::minmax_element(a.data.begin(), a.data.end());
  // Map entries affinely onto [1, 2]; the simplex tolerances are absolute.
  const double scale = *hi - *lo > 0.0 ? 1.0 / (*hi - *lo) : 1.0;
  Matrix b(a.rows, a.cols);
  for (std::size_t k = 0; k < a.data.size(); ++k) b.data[k] = 1.0 + (a.data[k] - *lo) * scale;
  auto lp = simplex_positive(b);
  normalize(lp.z);
  normalize(lp.w);
  return finish(a, std::move(lp.w), std::move(lp.z));
}

Matrix restrict(const Matrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix r(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) r(static_cast<int>(i), static_cast<int>(j)) = a(rows[i], cols[j]);
  }
  return r;
}

GameSolution solve_double_oracle(const Matrix& a, double tol) {
  std::vector<int> rows{0};
  std::vector<int> cols{0};
  GameSolution best;
  const int max_rounds = a.rows + a.cols + 1;
  for (int round = 0; round < max_rounds; ++round) {
    const auto sub = solve_dense(restrict(a, rows, cols));
    std::vector<double> x(static_cast<std::size_t>(a.rows), 0.0);
    std::vector<double> y(static_cast<std::size_t>(a.cols), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) x[rows[i]] = sub.row[i];
    for (std::size_t j = 0; j < cols.size(); ++j) y[cols[j]] = sub.col[j];
    best = finish(a, std::move(x), std::move(y));
    if (best.gap <= tol) return best;
    const auto rp = row_payoffs(a, best.col);
    const auto cp = col_payoffs(a, best.row);
    const int br_row = static_cast<int>(std::max_element(rp.begin(), rp.end()) - rp.begin());
    const int br_col = static_cast<int>(std::min_element(cp.begin(), cp.end()) - cp.begin());
    bool grew = false;
    if (std::find(rows.begin(), rows.end(), br_row) == rows.end()) {
      rows.push_back(br_row);
      grew = true;
    }
    if (std::find(cols.begin(), cols.end(), br_col) == cols.end()) {
      cols.push_back(br_col);
      grew = true;
    }
    if (!grew) break;
  }
  return best;
}

}  // namespace

std::vector<double> row_payoffs(const Matrix& a, const std::vector<double>& col) {
  std::vector<double> out(static_cast<std::size_t>(a.rows), 0.0);
  for (int i = 0; i < a.rows; ++i) {
    double acc = 0.0;
    for (int j = 0; j < a.cols; ++j) acc += a(i, j) * col[j];
    out[i] = acc;
  }
  return out;
}

std::vector<double> col_payoffs(const Matrix& a, const std::vector<double>& row) {
  std::vector<double> out(static_cast<std::size_t>(a.cols), 0.0);
  for (int i = 0; i < a.rows; ++i) {
    if (row[i] == 0.0) continue;
    for (int j = 0; j < a.cols; ++j) out[j] += row[i] * a(i, j);
  }
  return out;
}

GameStats game_stats() { return {g_solved.load(), g_max_gap.load()}; }

void reset_game_stats() {
  g_solved = 0;
  g_max_gap = 0.0;
}

GameSolution solve_zero_sum(const Matrix& payoff, double tol) {
  if (payoff.rows <= 0 || payoff.cols <= 0) throw DomainError("solve_zero_sum: empty matrix");
  for (double x : payoff.data) {
    if (!std::isfinite(x)) throw DomainError("solve_zero_sum: non-finite payoff entry");
  }
  GameSolution sol = payoff.rows <= kDenseGameLimit && payoff.cols <= kDenseGameLimit
                         ? solve_dense(payoff)
                         : solve_double_oracle(payoff, tol);
  record(sol.gap);
  if (!(sol.gap <= tol)) {
    throw SolverError("solve_zero_sum: duality gap " + format_double(sol.gap) + " exceeds " +
                      format_double(tol) + " on a " + std::to_string(payoff.rows) + "x" +
                      std::to_string(payoff.cols) + " game");
  }
  return sol;
}

}  // namespace offrl
