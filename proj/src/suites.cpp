#include "offrl/suites.hpp"

#include <algorithm>
#include <cmath>

#include "offrl/decision.hpp"
#include "offrl/instances.hpp"

namespace offrl {

void PropertyTally::check(double lhs, double rhs, double tol) {
  ++checked;
  const double excess = lhs - rhs;
  worst_excess = std::max(worst_excess, excess);
  if (!(excess <= tol)) ++violations;
}

PropertyTally& SuiteReport::at(const std::string& name) {
  for (auto& p : properties) {
    if (p.name == name) return p;
  }
  properties.push_back(PropertyTally{name});
  return properties.back();
}

const PropertyTally* SuiteReport::find(const std::string& name) const {
  for (const auto& p : properties) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

long SuiteReport::violations() const {
  long total = 0;
  for (const auto& p : properties) total += p.violations;
  return total;
}

namespace {

constexpr double kAlphas[] = {0.5, 1.0, 2.0};

double max_divergence(const LayeredMDP& model, const Regularizer& reg, const Policy& pi,
                      const std::vector<QFunction>& fs) {
  double worst = 0.0;
  for (const auto& f : fs) worst = std::max(worst, divergence_av(model, reg, pi, f));
  return worst;
}

double mixture_value(const LayeredMDP& mdp, const Regularizer& reg, const MixturePolicy& rho) {
  const auto vals = policy_values(mdp, reg, rho.support);
  double total = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) total += rho.weights[i] * vals[i];
  return total;
}

RandomMdpSpec small_spec(Rng& rng, int max_actions) {
  RandomMdpSpec spec;
  const int H = 1 + static_cast<int>(rng.below(3));
  spec.layer_sizes = {1};
  for (int h = 1; h < H; ++h) spec.layer_sizes.push_back(1 + static_cast<int>(rng.below(3)));
  spec.min_actions = 2;
  spec.max_actions = max_actions;
  return spec;
}

}  // namespace

SuiteReport decision_property_suite(int instances, std::uint64_t seed, double tol) {
  SuiteReport report;
  report.suite = "decision";
  const char* kOffset = "offset performance bound";
  const char* kRatio = "ratio performance bound";
  const char* kGreedy = "greedy performance bound";
  const char* kOffsetRatio = "ordec_offset <= (4/gamma) ordec_ratio^2";
  const char* kRatioGdec = "ordec_ratio <= gdec";
  const char* kSymmetry = "divergence symmetry";
  const char* kPessimism = "pessimism divergence bound";
  for (const char* name : {kOffset, kRatio, kGreedy, kOffsetRatio, kRatioGdec, kSymmetry, kPessimism}) report.at(name);

  Rng rng(seed);
  for (int i = 0; i < instances; ++i) {
    const Regularizer reg = i % 2 == 0 ? Regularizer::none() : Regularizer::shannon(kAlphas[rng.below(3)]);
    const DecisionInstance inst = random_decision_instance(rng, reg);
    const Regularizer& r = inst.universe.reg;
    const LayeredMDP& truth = inst.universe.models[0];
    const ValueSolution& star = inst.universe.solved[0];
    const auto& fs = inst.conf_functions;
    const double d_star = max_divergence(truth, r, star.policy, fs);

    const auto ratio = e2dor_ratio(inst.mconf, fs, inst.policies.policies);
    if (ratio.unbounded) {
      report.at(kRatio).skip();
    } else {
      report.at(kRatio).check(star.j - mixture_value(truth, r, ratio.rho), ratio.value * std::sqrt(d_star), tol);
    }
    for (double gamma : {0.1, 1.0, 10.0}) {
      const auto off = e2dor_offset(inst.mconf, fs, inst.policies.policies, gamma);
      report.at(kOffset).check(star.j - mixture_value(truth, r, off.rho), off.value + gamma * d_star, tol);
      if (ratio.unbounded) {
        report.at(kOffsetRatio).skip();
      } else {
        report.at(kOffsetRatio).check(off.value, 4.0 / gamma * ratio.value * ratio.value, tol);
      }
    }

    const auto gde = gde_select(truth, inst.conf, inst.fclass, r);
    const double gdec = compute_gdec(inst.mconf, gde.f);
    if (is_unbounded(gdec)) {
      report.at(kGreedy).skip();
      report.at(kRatioGdec).skip();
    } else {
      const double d = divergence_av(truth, r, star.policy, gde.f);
      report.at(kGreedy).check(star.j - policy_values(truth, r, {gde.pi}).front(), gdec * std::sqrt(d), tol);
      report.at(kRatioGdec).check(ratio.value, gdec, tol);
    }

    const auto& mc = inst.mconf;
    for (std::size_t a = 0; a < mc.size(); ++a) {
      const auto& pa = mc.solved[a].policy;
      const double gap = pessimism_gap(mc.models[a], r, pa, gde.f);
      report.at(kPessimism).check(gap * gap, divergence_av(mc.models[a], r, pa, gde.f), tol);
      for (std::size_t b = a + 1; b < mc.size(); ++b) {
        const auto& pb = mc.solved[b].policy;
        const auto& fa = mc.solved[a].q;
        const auto& fb = mc.solved[b].q;
        const double s = pessimism_gap(mc.models[a], r, pa, fb) + pessimism_gap(mc.models[b], r, pb, fa);
        const double rhs = divergence_av(mc.models[a], r, pa, fb) + divergence_av(mc.models[b], r, pb, fa);
        report.at(kSymmetry).check(0.5 * s * s, rhs, tol);
      }
    }
  }
  return report;
}

SuiteReport exploitability_suite(int instances, std::uint64_t seed, double min_gap) {
  SuiteReport report;
  report.suite = "exploitability";
  const char* kGap = "ER <= H / gap";
  const char* kShannon = "ER <= 3 C1 (1 + H^3 C2)";
  report.at(kGap);
  report.at(kShannon);
  Rng rng(seed);
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < instances; ++i) {
      const RandomMdpSpec spec = small_spec(rng, 3);
      CandidateModelSet mconf;
      mconf.reg = pass == 0 ? Regularizer::none() : Regularizer::shannon(kAlphas[i % 3]);
      const LayeredMDP base = random_mdp(spec, rng);
      const int count = 1 + static_cast<int>(rng.below(4));
      mconf.add(base, "M0");
      for (int k = 1; k < count; ++k) mconf.add(redraw_model(base, spec, rng), "M" + std::to_string(k));
      if (pass == 1 && rng.bernoulli(0.5)) mconf.reg.pi_ref = random_reference(base, rng);
      mconf.solve();
      const int H = base.horizon();
      QFunction f;
      if (pass == 0) {
        // Redraw until the gap requirement holds.
        do {
          f = random_function(base, 0.0, H, rng);
        } while (!(value_gap(base, f) > min_gap));
        const double gap = value_gap(base, f);
        report.at(kGap).check(exploitability_ratio(f, mconf), H / gap, 0.0);
      } else {
        f = random_function(base, 0.0, H, rng);
        const auto c = psi_constants(mconf.reg, H);
        const double bound = 3.0 * c.c1 * (1.0 + std::pow(H, 3) * c.c2);
        report.at(kShannon).check(exploitability_ratio(f, mconf), bound, 0.0);
      }
    }
  }
  return report;
}

SuiteReport second_order_pdl_suite(int pairs, std::uint64_t seed, double tol) {
  SuiteReport report;
  report.suite = "second-order performance difference";
  Rng rng(seed);
  const RegKind kinds[] = {RegKind::Shannon, RegKind::Tsallis, RegKind::LogBarrier};
  for (RegKind kind : kinds) {
    PropertyTally& tally = report.at(to_string(kind));
    int done = 0;
    int attempts = 0;
    while (done < pairs && attempts < 20 * pairs) {
      ++attempts;
      const RandomMdpSpec spec = small_spec(rng, 3);
      const LayeredMDP mdp = random_mdp(spec, rng);
      const double alpha = kAlphas[rng.below(3)];
      Regularizer reg = kind == RegKind::Shannon  ? Regularizer::shannon(alpha)
                        : kind == RegKind::Tsallis ? Regularizer::tsallis(alpha, 0.2 + 0.6 * rng.uniform())
                                                   : Regularizer::log_barrier(alpha);
      if (rng.bernoulli(0.5)) reg.pi_ref = random_reference(mdp, rng);
      const int H = mdp.horizon();
      const double B = static_cast<double>(H) * H;
      const auto opt = solve_optimal(mdp, reg);
      const Policy pi = rng.bernoulli(0.5) ? greedy_policy(mdp, reg, random_function(mdp, 0.0, H, rng))
                                           : random_policy(mdp, rng);
      const auto eval = policy_evaluation(mdp, reg, pi);
      double spread = 0.0;
      for (std::size_t k = 0; k < opt.q.size(); ++k) spread = std::max(spread, opt.q[k] - eval.q[k]);
      if (spread > B) {
        tally.skip();
        continue;
      }
      const auto occ = occupancy(mdp, opt.policy);
      double breg = 0.0;
      for (int s = 0; s < mdp.num_states(); ++s) {
        if (occ.d_state[s] == 0.0 || mdp.num_actions(s) < 2) continue;
        breg += occ.d_state[s] * bregman(reg, mdp.row(pi, s), mdp.row(opt.policy, s), s);
      }
      const auto c = psi_constants(reg, H);
      tally.check(opt.j - eval.j, 3.0 * (1.0 + B * H * c.c2) * breg, tol);
      ++done;
    }
  }
  return report;
}

namespace {

std::vector<double> random_simplex(int k, Rng& rng, double floor) {
  std::vector<double> p(static_cast<std::size_t>(k));
  double total = 0.0;
  for (double& x : p) {
    x = -std::log(1.0 - rng.uniform()) + floor;
    total += x;
  }
  for (double& x : p) x /= total;
  return p;
}

Regularizer random_regularizer(RegKind kind, int k, Rng& rng) {
  const double alpha = 0.1 + 2.9 * rng.uniform();
  Regularizer reg = kind == RegKind::Shannon  ? Regularizer::shannon(alpha)
                    : kind == RegKind::Tsallis ? Regularizer::tsallis(alpha, 0.1 + 0.8 * rng.uniform())
                                               : Regularizer::log_barrier(alpha);
  if (rng.bernoulli(0.5)) reg.pi_ref = {random_simplex(k, rng, 0.2)};
  return reg;
}

}  // namespace

SuiteReport regularizer_suite(int cases, std::uint64_t seed) {
  SuiteReport report;
  report.suite = "regularizer";
  const char* kKkt = "KKT stationarity residual <= 1e-10";
  const char* kInterior = "interior greedy policy";
  const char* kRatio = "log-barrier greedy ratio bound";
  const char* kGradient = "gradient matches central differences";
  const char* kIdentity = "optimality gap equals Bregman divergence";
  const char* kProp2 = "C1 Breg(p1, p2) >= Breg(p2, p1)";
  const char* kProp3 = "C2 Breg(p1, p2) >= KL(p1 || p2)";
  const char* kStability = "KL stability";
  for (const char* name : {kKkt, kInterior, kRatio, kGradient, kIdentity, kProp2, kProp3, kStability}) report.at(name);
  const RegKind kinds[] = {RegKind::Shannon, RegKind::Tsallis, RegKind::LogBarrier};

  Rng rng(seed);
  for (int i = 0; i < cases; ++i) {
    const RegKind kind = kinds[i % 3];
    const int k = 2 + static_cast<int>(rng.below(5));
    const int H = 1 + static_cast<int>(rng.below(5));
    const Regularizer reg = random_regularizer(kind, k, rng);
    std::vector<double> q1(static_cast<std::size_t>(k));
    std::vector<double> q2(static_cast<std::size_t>(k));
    for (double& x : q1) x = H * rng.uniform();
    for (double& x : q2) x = H * rng.uniform();
    const auto r1 = regularized_argmax(reg, q1, 0);
    const auto r2 = regularized_argmax(reg, q2, 0);
    report.at(kKkt).check(stationarity_residual(reg, r1.p, q1, 0), 1e-10, 0.0);
    report.at(kInterior).check(-*std::min_element(r1.p.begin(), r1.p.end()), 0.0, -1e-300);

    if (kind == RegKind::LogBarrier) {
      const double lo = reg.alpha / (reg.alpha + 2.0 * H);
      for (int a = 0; a < k; ++a) {
        const double ratio = r1.p[a] / r2.p[a];
        report.at(kRatio).check(lo, ratio, 1e-12);
        report.at(kRatio).check(ratio, 1.0 / lo, 1e-12);
      }
    }

    // Central differences on a random interior point.
    const auto x = random_simplex(k, rng, 0.3);
    std::vector<double> grad(static_cast<std::size_t>(k));
    phi_gradient(kind, reg.tsallis_q, x, grad);
    for (int a = 0; a < k; ++a) {
      auto up = x;
      auto down = x;
      up[a] += 1e-6;
      down[a] -= 1e-6;
      const double fd = (phi_value(kind, reg.tsallis_q, up) - phi_value(kind, reg.tsallis_q, down)) / 2e-6;
      report.at(kGradient).check(std::abs(fd - grad[a]), 1e-5 * std::max(1.0, std::abs(grad[a])), 0.0);
    }

    // Value gap of an arbitrary interior p against the maximizer.
    const auto p = random_simplex(k, rng, 0.05);
    double gp = -psi_value(reg, p, 0);
    for (int a = 0; a < k; ++a) gp += p[a] * q1[a];
    const double lhs = r1.value - gp;
    report.at(kIdentity).check(std::abs(lhs - bregman(reg, p, r1.p, 0)), 0.0, 1e-8);

    const auto c = psi_constants(reg, H);
    const double b12 = bregman(reg, r1.p, r2.p, 0);
    report.at(kProp2).check(bregman(reg, r2.p, r1.p, 0), c.c1 * b12, 1e-12);
    report.at(kProp3).check(kl_divergence(r1.p, r2.p), c.c2 * b12, 1e-12);

    const auto pp = random_simplex(k, rng, 0.0);
    std::vector<double> g(static_cast<std::size_t>(k));
    double gmax = 0.0;
    for (double& v : g) {
      v = 2.0 * rng.uniform() - 1.0;
      gmax = std::max(gmax, v);
    }
    const double eta = gmax > 0.0 ? rng.uniform() / gmax : rng.uniform();
    double left = 0.0;
    double second = 0.0;
    for (int a = 0; a < k; ++a) {
      left += (pp[a] - p[a]) * g[a];
      second += p[a] * g[a] * g[a];
    }
    report.at(kStability).check(left, kl_divergence(pp, p) / eta + eta * second, 1e-12);
  }
  return report;
}

}  // namespace offrl
