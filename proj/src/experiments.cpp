#include "offrl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "offrl/parallel.hpp"

namespace offrl {

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  out.count = static_cast<int>(xs.size());
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / out.count;
  if (out.count > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std_error = std::sqrt(ss / (out.count - 1) / out.count);
  }
  return out;
}

double CqlSweepConfig::lambda_for(std::size_t n) const {
  return lambda_rule == "sqrt" ? std::sqrt(static_cast<double>(n)) : lambda;
}

std::vector<std::string> CqlSweepConfig::validate() const {
  std::vector<std::string> out;
  if (n_grid.empty()) out.push_back("n_grid is empty");
  for (std::size_t n : n_grid) {
    if (n == 0) out.push_back("n_grid entries must be positive");
  }
  if (seeds < 1) out.push_back("seeds must be at least 1");
  if (lambda_rule != "sqrt" && lambda_rule != "constant") out.push_back("lambda_rule must be sqrt or constant");
  if (lambda_rule == "constant" && !(lambda >= 0.0 && std::isfinite(lambda))) out.push_back("lambda must be finite and >= 0");
  if (jobs < 1) out.push_back("jobs must be at least 1");
  return out;
}

std::vector<CqlRun> cql_sweep(const CqlInstance& inst, const CqlSweepConfig& config) {
  const auto findings = config.validate();
  if (!findings.empty()) throw ValidationError(findings);
  CqlConfig base;
  base.alpha = inst.reg.alpha;
  base.pi_ref = inst.reg.pi_ref;
  base.gclass = inst.gclass;
  const double j_star = inst.optimal.j;

  std::vector<CqlRun> runs(config.n_grid.size() * static_cast<std::size_t>(config.seeds));
  parallel_for(runs.size(), config.jobs, [&](std::size_t i) {
    const std::size_t n = config.n_grid[i / config.seeds];
    const int seed = static_cast<int>(i % config.seeds);
    const auto data = sample_dataset(inst.mdp, inst.mu, n, derive_seed(derive_seed(config.base_seed, n), seed));
    CqlConfig cfg = base;
    cfg.lambda = config.lambda_for(n);
    const auto result = cql_select(inst.mdp, data, inst.fclass, cfg);
    CqlRun& run = runs[i];
    run.n = n;
    run.seed = seed;
    run.lambda = cfg.lambda;
    run.alpha = cfg.alpha;
    run.index = result.index;
    run.label = inst.fclass.names[result.index];
    run.f_s1 = state_value(inst.mdp, inst.reg, result.f, inst.mdp.initial_state());
    run.j_star = j_star;
    run.j_hat = policy_evaluation(inst.mdp, inst.reg, result.pi).j;
    run.suboptimality = j_star - run.j_hat;
  });
  return runs;
}

std::vector<SweepPoint> summarize_sweep(const std::vector<CqlRun>& runs) {
  std::vector<SweepPoint> out;
  std::vector<std::vector<double>> groups;
  for (const auto& r : runs) {
    std::size_t k = 0;
    while (k < out.size() && out[k].n != r.n) ++k;
    if (k == out.size()) {
      out.push_back({r.n, {}});
      groups.emplace_back();
    }
    groups[k].push_back(r.suboptimality);
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k].stats = mean_stderr(groups[k]);
  return out;
}

bool non_increasing_within(const std::vector<SweepPoint>& points, double band) {
  for (std::size_t k = 1; k < points.size(); ++k) {
    const auto& prev = points[k - 1].stats;
    const auto& cur = points[k].stats;
    const double se = std::max(prev.std_error, cur.std_error);
    if (cur.mean > prev.mean + band * se) return false;
  }
  return true;
}

CoverageResult confidence_coverage(const ConfidenceInstance& inst, const CoverageConfig& config) {
  std::vector<char> covered(static_cast<std::size_t>(std::max(0, config.seeds)), 0);
  std::vector<std::size_t> sizes(covered.size(), 0);
  parallel_for(covered.size(), config.jobs, [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(derive_seed(config.base_seed, static_cast<std::uint64_t>(config.method)), i);
    ConfidenceSet conf;
    switch (config.method) {
      case ConfMethod::BC:
        conf = build_conf_bc(inst.mdp, sample_dataset(inst.mdp, inst.mu, config.n, seed), inst.fclass, inst.gclass,
                             inst.reg, config.delta);
        break;
      case ConfMethod::WR:
        conf = build_conf_wr(inst.mdp, sample_dataset(inst.mdp, inst.mu, config.n, seed), inst.fclass, inst.wclass,
                             inst.reg, config.delta);
        break;
      case ConfMethod::BR:
        conf = build_conf_br(inst.mdp, sample_double_policy_dataset(inst.mdp, inst.mixture, config.n, seed),
                             inst.fclass, inst.reg, config.delta);
        break;
    }
    covered[i] = conf.contains(inst.truth) ? 1 : 0;
    sizes[i] = conf.indices.size();
  });
  CoverageResult out;
  out.method = config.method;
  out.runs = static_cast<int>(covered.size());
  out.covered = static_cast<int>(std::count(covered.begin(), covered.end(), 1));
  if (out.runs > 0) out.mean_size = static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0})) / out.runs;
  return out;
}

}  // namespace offrl
