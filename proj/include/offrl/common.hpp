#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace offrl {

/// Flat table indexed by state-action position (see LayeredMDP::sa).
using SATable = std::vector<double>;
/// Row-stochastic table over state-action positions.
using Policy = SATable;
/// Tabular action-value function.
using QFunction = SATable;
/// Probability distribution over state-action positions.
using DataDistribution = SATable;

/// Sentinel for unbounded ratios (coverage, Gdec, ER, Ordec-R).
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

inline bool is_unbounded(double x) { return std::isinf(x) && x > 0; }

/// Raised when an input breaks a documented invariant.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> findings);
  const std::vector<std::string>& findings() const { return findings_; }

 private:
  std::vector<std::string> findings_;
};

/// Raised when an argument lies outside the domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised by iterative solvers that fail to converge.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 64-bit FNV-1a digest, rendered as 16 hex digits by hex_digest.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex_digest(std::uint64_t h);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

}  // namespace offrl
