#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace offrl {

/// Outcome of one inequality checked over many random cases.
struct PropertyTally {
  std::string name;
  long checked = 0;
  long violations = 0;
  long skipped = 0;
  /// Largest lhs - rhs seen (negative when every case held with room).
  double worst_excess = -1e300;

  /// Counts lhs <= rhs + tol.
  void check(double lhs, double rhs, double tol);
  void skip() { ++skipped; }
};

struct SuiteReport {
  std::string suite;
  std::vector<PropertyTally> properties;

  PropertyTally& at(const std::string& name);
  const PropertyTally* find(const std::string& name) const;
  long violations() const;
};

/// Offset, ratio and greedy performance bounds, Ordec-O <= (4/gamma) Ordec-R^2,
/// Ordec-R <= Gdec, and the two divergence inequalities, on random model
/// universes (alternating unregularized and Shannon instances).
SuiteReport decision_property_suite(int instances, std::uint64_t seed, double tol = 1e-7);

/// ER <= H / gap on unregularized instances with gap > min_gap, and the
/// Shannon ER bound 3 C1 (1 + H^3 C2) for alpha in {0.5, 1, 2}.
SuiteReport exploitability_suite(int instances, std::uint64_t seed, double min_gap = 0.05);

/// J(pi_M) - J(pi) <= 3 (1 + B H C2) E_{d^pi_M} Breg(pi, pi_M; s) with B = H^2,
/// `pairs` random (M, pi) pairs for each Bregman kind.
SuiteReport second_order_pdl_suite(int pairs, std::uint64_t seed, double tol = 1e-8);

/// KKT residuals, log-barrier ratio bounds, gradient checks, the optimality
/// gap identity, the two regularity properties of greedy policies, KL
/// stability and interiority.
SuiteReport regularizer_suite(int cases, std::uint64_t seed);

}  // namespace offrl
