#pragma once

#include <vector>

namespace offrl {

/// Dense row-major payoff matrix; the row player maximizes.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
};

struct GameSolution {
  std::vector<double> row;  ///< maximizer's mixture
  std::vector<double> col;  ///< minimizer's mixture
  /// max_i (A col)_i, the value guaranteed by the column mixture.
  double value = 0.0;
  /// max_i (A col)_i - min_j (row^T A)_j.
  double gap = 0.0;
};

/// Games with at most this many rows and columns go straight to the LP.
inline constexpr int kDenseGameLimit = 512;

/// max_x min_y x^T A y. Dense simplex for small games, double oracle beyond.
/// Throws DomainError on non-finite entries and SolverError if the duality
/// gap exceeds `tol`.
GameSolution solve_zero_sum(const Matrix& payoff, double tol = 1e-6);

/// Process-wide record of solved games, for auditing solver accuracy.
struct GameStats {
  long long solved = 0;
  double max_gap = 0.0;
};
GameStats game_stats();
void reset_game_stats();

/// Expected payoffs of mixtures.
std::vector<double> row_payoffs(const Matrix& a, const std::vector<double>& col);
std::vector<double> col_payoffs(const Matrix& a, const std::vector<double>& row);

}  // namespace offrl
