#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "offrl/cql.hpp"
#include "offrl/estimation.hpp"
#include "offrl/instances.hpp"

namespace offrl {

struct MeanStderr {
  int count = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& xs);

struct CqlSweepConfig {
  std::vector<std::size_t> n_grid{100, 1000, 10000, 100000};
  int seeds = 50;
  std::uint64_t base_seed = 1;
  /// "sqrt" (lambda = sqrt(n)) or "constant".
  std::string lambda_rule = "sqrt";
  double lambda = 1.0;
  int jobs = 1;

  double lambda_for(std::size_t n) const;
  std::vector<std::string> validate() const;
};

struct CqlRun {
  std::size_t n = 0;
  int seed = 0;
  double lambda = 0.0;
  double alpha = 0.0;
  int index = -1;
  std::string label;
  double f_s1 = 0.0;
  double j_star = 0.0;
  double j_hat = 0.0;
  double suboptimality = 0.0;
};

/// One dataset per (n, seed), drawn from the instance's mu. Rows are ordered
/// by (n, seed) whatever the worker count.
std::vector<CqlRun> cql_sweep(const CqlInstance& inst, const CqlSweepConfig& config);

struct SweepPoint {
  std::size_t n = 0;
  MeanStderr stats;
};

/// Suboptimality statistics per n, in grid order.
std::vector<SweepPoint> summarize_sweep(const std::vector<CqlRun>& runs);

/// True when each mean is at most the previous one plus twice the larger of
/// the two standard errors.
bool non_increasing_within(const std::vector<SweepPoint>& points, double band = 2.0);

struct CoverageConfig {
  ConfMethod method = ConfMethod::BC;
  std::size_t n = 5000;
  int seeds = 200;
  double delta = 0.1;
  std::uint64_t base_seed = 1;
  int jobs = 1;
};

struct CoverageResult {
  ConfMethod method = ConfMethod::BC;
  int runs = 0;
  int covered = 0;
  double mean_size = 0.0;
  double rate() const { return runs == 0 ? 0.0 : static_cast<double>(covered) / runs; }
};

/// Fraction of seeds whose confidence set keeps Q*.
CoverageResult confidence_coverage(const ConfidenceInstance& inst, const CoverageConfig& config);

}  // namespace offrl
