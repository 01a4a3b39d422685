// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "offrl/decision.hpp"
#include "offrl/experiments.hpp"
#include "offrl/game.hpp"
#include "offrl/hardness.hpp"
#include "offrl/instances.hpp"
#include "offrl/suites.hpp"
#include "oracles.hpp"

using namespace offrl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

bool near(double x, double y, double tol) { return std::abs(x - y) <= tol; }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double action_mass(const LayeredMDP& shape, const MixturePolicy& rho, int action) {
  double m = 0.0;
  for (std::size_t i = 0; i < rho.support.size(); ++i) m += rho.weights[i] * rho.support[i][shape.sa(0, action)];
  return m;
}

std::string suite_detail(const SuiteReport& r) {
  std::string out;
  for (const auto& p : r.properties) {
    if (!out.empty()) out += "; ";
    out += p.name + ": " + std::to_string(p.violations) + "/" + std::to_string(p.checked);
  }
  return out;
}

Outcome robust_choice() {
  const double delta = 0.01;
  const auto w = robust_choice_bandit(delta);
  const auto& models = w.models;
  const auto& shape = models.shape();
  const auto conf = full_confidence_set(w.fclass);
  const auto fs = conf_members(conf, w.fclass);
  const auto ps = build_policy_set(models, fs);
  const auto gde = gde_select(shape, conf, w.fclass, models.reg);
  bool ok = gde.index == kBanditY && gde.pi[shape.sa(0, kBanditY)] == 1.0;
  const MixturePolicy gde_rho{{gde.pi}, {1.0}};
  std::string detail = "gde=" + w.fclass.names[gde.index];
  for (double gamma : {0.001, 0.0025, 0.005}) {
    const auto res = e2dor_offset(models, fs, ps.policies, gamma);
    const MixturePolicy robust{{res.rho.support[res.rho.heaviest()]}, {1.0}};
    ok &= robust.support[0][shape.sa(0, kBanditX)] == 1.0;
    ok &= near(suboptimality(models.models[0], models.reg, gde_rho), 1.0, 1e-9);
    ok &= near(suboptimality(models.models[0], models.reg, robust), 0.0, 1e-9);
    ok &= near(suboptimality(models.models[1], models.reg, gde_rho), 0.0, 1e-9);
    ok &= near(suboptimality(models.models[1], models.reg, robust), 2.0 * delta, 1e-9);
  }
  detail += ", robust action x, suboptimality (1, 0) and (0, 0.02)";
  return {ok, detail};
}

Outcome hedging() {
  const double delta = 0.01;
  const auto w = hedging_bandit(delta);
  const auto& models = w.models;
  const auto& shape = models.shape();
  const auto conf = full_confidence_set(w.fclass);
  const auto fs = conf_members(conf, w.fclass);
  const auto ps = build_policy_set(models, fs);
  const auto gde = gde_select(shape, conf, w.fclass, models.reg);
  const double gdec = compute_gdec(models, gde.f);
  const auto ratio = e2dor_ratio(models, fs, ps.policies);
  bool ok = near(gdec, 1.0, 1e-9) && ratio.value <= delta + 1e-9 && action_mass(shape, ratio.rho, kBanditZ) >= 0.99;
  double worst_mass = action_mass(shape, ratio.rho, kBanditZ);
  for (double gamma : {delta / 4, delta / 2}) {
    const auto off = e2dor_offset(models, fs, ps.policies, gamma);
    const double mass = action_mass(shape, off.rho, kBanditZ);
    worst_mass = std::min(worst_mass, mass);
    ok &= off.value <= delta - gamma + 1e-9 && mass >= 0.99;
  }
  return {ok, fmt("gdec=%.12g", gdec) + fmt(", ordec_ratio=%.6g", ratio.value) + fmt(", min z mass=%.6g", worst_mass)};
}

Outcome certificates() {
  int total = 0, good = 0;
  for (double delta : {0.0, 0.1}) {
    for (HardFamily fam : kAllFamilies) {
      for (std::uint64_t phi = 1; phi <= 10; ++phi) {
        const auto inst = build_hard_instance(fam, 1000, delta, derive_seed(phi, static_cast<std::uint64_t>(fam)));
        const auto c = certify(inst);
        ++total;
        good += c.realizable && c.bellman_complete && c.structure_valid && near(c.coverage, 2.0, 1e-9) &&
                near(c.optimal_value, 1.5 + delta, 1e-9);
      }
    }
  }
  return {good == total, std::to_string(good) + "/" + std::to_string(total) + " certified"};
}

Outcome plateau() {
  HardnessConfig cfg;
  cfg.m = 1000000;
  cfg.delta = 0.0;
  cfg.n_grid = {100};
  cfg.seeds = 200;
  cfg.base_seed = 1;
  cfg.jobs = jobs();
  const auto summary = summarize(hardness_experiment(cfg));
  bool ok = !summary.empty();
  std::string detail;
  for (const auto& s : summary) {
    ok &= s.mean >= 0.45;
    if (!detail.empty()) detail += ", ";
    detail += s.algorithm + fmt("=%.4f", s.mean) + fmt("+-%.4f", s.std_error);
  }
  return {ok, detail};
}

Outcome decision_bounds() {
  const auto r = decision_property_suite(100, 1, 1e-7);
  return {r.violations() == 0, suite_detail(r)};
}

Outcome er_bounds() {
  const auto r = exploitability_suite(100, 1, 0.05);
  return {r.violations() == 0, suite_detail(r)};
}

Outcome kkt() {
  const auto r = regularizer_suite(500, 1);
  bool ok = true;
  for (const char* name : {"KKT stationarity residual <= 1e-10", "log-barrier greedy ratio bound"}) {
    const auto* p = r.find(name);
    ok &= p != nullptr && p->violations == 0 && p->checked > 0;
  }
  // Shannon closed form against the numeric maximizer.
  Rng rng(2);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const int k = 2 + static_cast<int>(rng.below(5));
    Regularizer reg = Regularizer::shannon(0.1 + 2.0 * rng.uniform());
    std::vector<double> ref(static_cast<std::size_t>(k)), q(static_cast<std::size_t>(k));
    double total = 0.0;
    for (double& x : ref) total += (x = 0.05 + rng.uniform());
    for (double& x : ref) x /= total;
    for (double& x : q) x = 3.0 * rng.uniform();
    reg.pi_ref = {ref};
    const auto p = regularized_argmax(reg, q, 0).p;
    const auto o = oracle::numeric_argmax(RegKind::Shannon, reg.alpha, 0.5, q, ref);
    for (int a = 0; a < k; ++a) worst = std::max(worst, std::abs(p[a] - o[a]));
  }
  ok &= worst <= 1e-8;
  return {ok, suite_detail(r) + fmt("; shannon vs numeric max |dp|=%.2e", worst)};
}

Outcome pdl() {
  const auto r = second_order_pdl_suite(100, 1, 1e-8);
  return {r.violations() == 0, suite_detail(r)};
}

Outcome coverage() {
  const auto inst = confidence_canonical_instance();
  bool ok = true;
  std::string detail;
  for (ConfMethod m : {ConfMethod::BC, ConfMethod::WR, ConfMethod::BR}) {
    CoverageConfig cfg;
    cfg.method = m;
    cfg.jobs = jobs();
    const auto start = std::chrono::steady_clock::now();
    const auto res = confidence_coverage(inst, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ok &= res.rate() >= 0.85 && secs < 300.0;
    if (!detail.empty()) detail += ", ";
    detail += to_string(m) + fmt("=%.3f", res.rate()) + fmt(" in %.1f s", secs);
  }
  return {ok, detail};
}

Outcome cql_end_point() {
  const auto inst = cql_canonical_instance();
  CqlSweepConfig cfg;
  cfg.jobs = jobs();
  const auto points = summarize_sweep(cql_sweep(inst, cfg));
  const bool ok = !points.empty() && points.back().n == 100000 && points.back().stats.mean <= 0.05 &&
                  non_increasing_within(points, 2.0);
  std::string detail;
  for (const auto& p : points) {
    if (!detail.empty()) detail += ", ";
    detail += "n=" + std::to_string(p.n) + fmt(": %.4f", p.stats.mean) + fmt("+-%.4f", p.stats.std_error);
  }
  return {ok, detail};
}

Outcome games() {
  Rng rng(11);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int r = 1 + static_cast<int>(rng.below(8));
    const int c = 1 + static_cast<int>(rng.below(8));
    Matrix a(r, c);
    for (double& x : a.data) x = 2.0 * rng.uniform() - 1.0;
    worst = std::max(worst, std::abs(solve_zero_sum(a).value - oracle::game_value(a)));
  }
  const auto stats = game_stats();
  return {worst <= 1e-6 && stats.max_gap <= 1e-6,
          fmt("max |value - oracle|=%.2e", worst) + ", " + std::to_string(stats.solved) + " games" +
              fmt(", max duality gap=%.2e", stats.max_gap)};
}

}  // namespace

int main() {
  reset_game_stats();
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "robust choice bandit", 1.0, robust_choice},
      {2, "hedging bandit", 1.0, hedging},
      {3, "hardness certificates", 30.0, certificates},
      {4, "hardness plateau", 600.0, plateau},
      {5, "decision-rule bounds", 0.0, decision_bounds},
      {6, "gap and exploitability bounds", 0.0, er_bounds},
      {7, "regularized argmax", 0.0, kkt},
      {8, "second-order performance difference", 0.0, pdl},
      {9, "confidence-set coverage", 0.0, coverage},
      {10, "CQL end point", 0.0, cql_end_point},
      {11, "game solver", 0.0, games},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      out.pass = false;
      out.detail += fmt("; over time budget %.0f s", c.budget_s);
    }
    failures += !out.pass;
    std::printf("%s %2d %s (%.2f s): %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, secs, out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
