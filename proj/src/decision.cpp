#include "offrl/decision.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace offrl {

namespace {

constexpr double kRatioZeroDen = 1e-10;  // on sqrt(D)
constexpr double kRatioZeroNum = 1e-9;

double max_divergence(const LayeredMDP& model, const Regularizer& reg, const Policy& pi,
                      const std::vector<QFunction>& fs) {
  const auto occ = occupancy(model, pi);
  double worst = 0.0;
  for (const auto& f : fs) {
    const auto tf = bellman_apply(model, reg, f);
    double avg = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) avg += occ.d[i] * (f[i] - tf[i]);
    worst = std::max(worst, avg * avg);
  }
  return worst;
}

MixturePolicy to_mixture(const std::vector<Policy>& policies, const std::vector<double>& w) {
  MixturePolicy rho;
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 1e-15) total += w[i];
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 1e-15) {
      rho.support.push_back(policies[i]);
      rho.weights.push_back(w[i] / total);
    }
  }
  return rho;
}

void require_models(const CandidateModelSet& mconf, const std::vector<Policy>& policy_set) {
  if (mconf.empty()) throw DomainError("e2dor: no consistent model");
  if (policy_set.empty()) throw DomainError("e2dor: empty policy set");
  if (mconf.solved.size() != mconf.size()) throw DomainError("e2dor: candidate models are not solved");
}

// Values J_M(pi) for every model (row) and policy (column).
Matrix value_table(const CandidateModelSet& mconf, const std::vector<Policy>& policy_set) {
  Matrix j(static_cast<int>(mconf.size()), static_cast<int>(policy_set.size()));
  for (std::size_t m = 0; m < mconf.size(); ++m) {
    const auto vals = policy_values(mconf.models[m], mconf.reg, policy_set);
    for (std::size_t k = 0; k < vals.size(); ++k) j(static_cast<int>(m), static_cast<int>(k)) = vals[k];
  }
  return j;
}

DecisionResult from_game(const std::vector<Policy>& policy_set, const std::vector<int>& cols,
                         const GameSolution& g) {
  DecisionResult res;
  res.weights.assign(policy_set.size(), 0.0);
  for (std::size_t j = 0; j < cols.size(); ++j) res.weights[cols[j]] = g.col[j];
  res.rho = to_mixture(policy_set, res.weights);
  res.value = g.value;
  res.gap = g.gap;
  return res;
}

// Greedy action sets per state (all maximizers within tolerance).
std::vector<std::vector<int>> argmax_sets(const LayeredMDP& shape, const QFunction& f) {
  std::vector<std::vector<int>> sets(static_cast<std::size_t>(shape.num_states()));
  for (int s = 0; s < shape.num_states(); ++s) {
    const auto row = shape.row(f, s);
    const double best = *std::max_element(row.begin(), row.end());
    const double tol = 1e-12 * std::max(1.0, std::abs(best));
    for (int a = 0; a < shape.num_actions(s); ++a) {
      if (row[a] >= best - tol) sets[s].push_back(a);
    }
  }
  return sets;
}

std::vector<Policy> tie_variants(const LayeredMDP& shape, const QFunction& f, int cap) {
  const auto sets = argmax_sets(shape, f);
  std::vector<int> choice(sets.size(), 0);
  std::vector<Policy> out;
  while (static_cast<int>(out.size()) < cap) {
    std::vector<int> actions(sets.size());
    for (std::size_t s = 0; s < sets.size(); ++s) actions[s] = sets[s][choice[s]];
    out.push_back(deterministic_policy(shape, actions));
    std::size_t s = sets.size();
    while (s > 0) {
      --s;
      if (++choice[s] < static_cast<int>(sets[s].size())) break;
      choice[s] = 0;
      if (s == 0) return out;
    }
    if (sets.empty()) break;
  }
  return out;
}

}  // namespace

void CandidateModelSet::add(LayeredMDP m, std::string name) {
  models.push_back(std::move(m));
  names.push_back(std::move(name));
}

void CandidateModelSet::solve() {
  for (std::size_t i = solved.size(); i < models.size(); ++i) {
    solved.push_back(solve_optimal(models[i], reg));
  }
}

std::vector<std::string> CandidateModelSet::validate() const {
  std::vector<std::string> findings;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string label = i < names.size() ? names[i] : std::to_string(i);
    if (i > 0 && !models[i].same_shape(models[0])) {
      findings.push_back("candidate '" + label + "': shape differs from the first model");
    }
    for (auto& f : models[i].validate()) findings.push_back("candidate '" + label + "': " + f);
  }
  reg.validate(findings);
  return findings;
}

int MixturePolicy::heaviest() const {
  if (weights.empty()) return -1;
  return static_cast<int>(std::max_element(weights.begin(), weights.end()) - weights.begin());
}

long long deterministic_policy_count(const LayeredMDP& mdp, long long cap) {
  long long count = 1;
  for (int s = 0; s < mdp.num_states(); ++s) {
    const int k = mdp.num_actions(s);
    if (k < 2) continue;
    if (count > (cap + 1) / k) return cap + 1;
    count *= k;
  }
  return std::min(count, cap + 1);
}

std::vector<Policy> enumerate_deterministic(const LayeredMDP& mdp, long long limit) {
  if (deterministic_policy_count(mdp, limit) > limit) {
    throw DomainError("enumerate_deterministic: more than " + std::to_string(limit) + " policies");
  }
  std::vector<int> decision;
  for (int s = 0; s < mdp.num_states(); ++s) {
    if (mdp.num_actions(s) > 1) decision.push_back(s);
  }
  std::vector<int> actions(static_cast<std::size_t>(mdp.num_states()), 0);
  std::vector<Policy> out;
  while (true) {
    out.push_back(deterministic_policy(mdp, actions));
    std::size_t k = decision.size();
    bool carry = true;
    while (carry && k > 0) {
      --k;
      const int s = decision[k];
      if (++actions[s] < mdp.num_actions(s)) {
        carry = false;
      } else {
        actions[s] = 0;
      }
    }
    if (carry) break;
  }
  return out;
}

PolicySet build_policy_set(const CandidateModelSet& mconf, const std::vector<QFunction>& conf_functions,
                           long long limit) {
  if (mconf.empty()) throw DomainError("build_policy_set: no candidate models");
  const LayeredMDP& shape = mconf.shape();
  PolicySet out;
  const long long count = deterministic_policy_count(shape, limit);
  // Log-barrier charges +inf at simplex vertices, so deterministic policies are excluded.
  const bool vertices_ok = mconf.reg.inactive() || mconf.reg.kind != RegKind::LogBarrier;
  if (count <= limit && vertices_ok) {
    out.policies = enumerate_deterministic(shape, limit);
    out.enumerated = true;
  }
  auto push_unique = [&](Policy p) {
    if (std::find(out.policies.begin(), out.policies.end(), p) == out.policies.end()) {
      out.policies.push_back(std::move(p));
    }
  };
  for (const auto& sol : mconf.solved) push_unique(sol.policy);
  for (const auto& f : conf_functions) push_unique(greedy_policy(shape, mconf.reg, f));
  push_unique(uniform_policy(shape));
  out.description = out.enumerated
                        ? "deterministic enumeration (" + std::to_string(count) +
                              ") plus model-optimal, greedy and uniform policies; " +
                              std::to_string(out.policies.size()) + " total"
                        : "model-optimal, greedy and uniform policies; " +
                              std::to_string(out.policies.size()) + " total";
  return out;
}

std::vector<double> policy_values(const LayeredMDP& mdp, const Regularizer& reg,
                                  const std::vector<Policy>& policies) {
  std::vector<double> out;
  out.reserve(policies.size());
  std::vector<double> v(static_cast<std::size_t>(mdp.num_states()), 0.0);
  for (const auto& pi : policies) {
    for (int h = mdp.horizon() - 1; h >= 0; --h) {
      for (int s : mdp.layer(h)) {
        const auto prow = mdp.row(pi, s);
        double acc = 0.0;
        for (int a = 0; a < mdp.num_actions(s); ++a) {
          if (prow[a] == 0.0) continue;
          double q = mdp.reward(s, a);
          for (const auto& nx : mdp.next(s, a)) q += nx.prob * v[nx.state];
          acc += prow[a] * q;
        }
        if (mdp.num_actions(s) > 1 && !reg.inactive()) acc -= psi_value(reg, prow, s);
        v[s] = acc;
      }
    }
    out.push_back(v[static_cast<std::size_t>(mdp.initial_state())]);
  }
  return out;
}

double divergence_av(const LayeredMDP& model, const Regularizer& reg, const Policy& pi,
                     const QFunction& f) {
  return max_divergence(model, reg, pi, {f});
}

double pessimism_gap(const LayeredMDP& model, const Regularizer& reg, const Policy& pi, const QFunction& f) {
  const auto occ = occupancy(model, pi);
  const auto fv = state_values(model, reg, f);
  double total = 0.0;
  for (int s = 0; s < model.num_states(); ++s) {
    const double ds = occ.d_state[s];
    if (ds == 0.0) continue;
    const auto prow = model.row(pi, s);
    const auto frow = model.row(f, s);
    double inner = fv[s];
    for (int a = 0; a < model.num_actions(s); ++a) inner -= prow[a] * frow[a];
    if (model.num_actions(s) > 1) inner += psi_value(reg, prow, s);
    total += ds * inner;
  }
  return total;
}

CandidateModelSet induce_model_set(const CandidateModelSet& cands, const ConfidenceSet& conf,
                                   const FunctionClass& fclass, double tol) {
  CandidateModelSet out;
  out.reg = cands.reg;
  for (std::size_t m = 0; m < cands.size(); ++m) {
    const QFunction q = m < cands.solved.size() ? cands.solved[m].q : solve_optimal(cands.models[m], cands.reg).q;
    bool keep = false;
    for (int i : conf.indices) {
      if (sup_distance(q, fclass.members[i]) <= tol) {
        keep = true;
        break;
      }
    }
    if (!keep) continue;
    out.models.push_back(cands.models[m]);
    out.names.push_back(m < cands.names.size() ? cands.names[m] : std::to_string(m));
    if (m < cands.solved.size()) out.solved.push_back(cands.solved[m]);
  }
  out.solve();
  return out;
}

std::vector<QFunction> conf_members(const ConfidenceSet& conf, const FunctionClass& fclass) {
  std::vector<QFunction> out;
  out.reserve(conf.indices.size());
  for (int i : conf.indices) out.push_back(fclass.members[i]);
  return out;
}

DecisionResult e2dor_offset(const CandidateModelSet& mconf, const std::vector<QFunction>& conf_functions,
                            const std::vector<Policy>& policy_set, double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("e2dor_offset: gamma must be nonnegative");
  require_models(mconf, policy_set);
  const Matrix j = value_table(mconf, policy_set);
  Matrix a(j.rows, j.cols);
  for (int m = 0; m < j.rows; ++m) {
    const double penalty = gamma * max_divergence(mconf.models[m], mconf.reg, mconf.solved[m].policy, conf_functions);
    const double best = mconf.solved[m].j;
    for (int k = 0; k < j.cols; ++k) a(m, k) = best - j(m, k) - penalty;
  }
  std::vector<int> cols(policy_set.size());
  std::iota(cols.begin(), cols.end(), 0);
  return from_game(policy_set, cols, solve_zero_sum(a));
}

DecisionResult e2dor_ratio(const CandidateModelSet& mconf, const std::vector<QFunction>& conf_functions,
                           const std::vector<Policy>& policy_set) {
  require_models(mconf, policy_set);
  const Matrix j = value_table(mconf, policy_set);
  std::vector<double> root_d(mconf.size());
  std::vector<int> zero_rows;
  std::vector<int> pos_rows;
  for (std::size_t m = 0; m < mconf.size(); ++m) {
    root_d[m] = std::sqrt(max_divergence(mconf.models[m], mconf.reg, mconf.solved[m].policy, conf_functions));
    (root_d[m] <= kRatioZeroDen ? zero_rows : pos_rows).push_back(static_cast<int>(m));
  }
  auto num = [&](int m, int k) { return std::max(0.0, mconf.solved[m].j - j(m, k)); };
  std::vector<int> cols;
  int least_bad = 0;
  double least_bad_num = kUnbounded;
  for (int k = 0; k < j.cols; ++k) {
    double worst = 0.0;
    for (int m : zero_rows) worst = std::max(worst, num(m, k));
    if (worst <= kRatioZeroNum) cols.push_back(k);
    if (worst < least_bad_num) {
      least_bad_num = worst;
      least_bad = k;
    }
  }
  DecisionResult res;
  res.weights.assign(policy_set.size(), 0.0);
  if (cols.empty()) {
    res.weights[least_bad] = 1.0;
    res.rho = to_mixture(policy_set, res.weights);
    res.value = kUnbounded;
    res.unbounded = true;
    return res;
  }
  if (pos_rows.empty()) {
    res.weights[cols.front()] = 1.0;
    res.rho = to_mixture(policy_set, res.weights);
    res.value = 0.0;
    return res;
  }
  Matrix a(static_cast<int>(pos_rows.size()), static_cast<int>(cols.size()));
  for (std::size_t r = 0; r < pos_rows.size(); ++r) {
    const int m = pos_rows[r];
    for (std::size_t c = 0; c < cols.size(); ++c) {
      a(static_cast<int>(r), static_cast<int>(c)) = num(m, cols[c]) / root_d[m];
    }
  }
  return from_game(policy_set, cols, solve_zero_sum(a));
}

DecisionResult e2dor_arbitrary_comparator(const CandidateModelSet& mconf,
                                          const std::vector<QFunction>& conf_functions,
                                          const std::vector<Policy>& policy_set,
                                          const std::vector<Policy>& comparators, double gamma) {
  if (comparators.empty()) throw DomainError("e2dor_arbitrary_comparator: empty comparator class");
  if (!(gamma >= 0.0)) throw DomainError("e2dor_arbitrary_comparator: gamma must be nonnegative");
  require_models(mconf, policy_set);
  const Matrix j = value_table(mconf, policy_set);
  Matrix a(static_cast<int>(mconf.size() * comparators.size()), j.cols);
  int row = 0;
  for (std::size_t m = 0; m < mconf.size(); ++m) {
    const auto comp_values = policy_values(mconf.models[m], mconf.reg, comparators);
    for (std::size_t c = 0; c < comparators.size(); ++c, ++row) {
      const double penalty = gamma * max_divergence(mconf.models[m], mconf.reg, comparators[c], conf_functions);
      for (int k = 0; k < j.cols; ++k) {
        a(row, k) = comp_values[c] - j(static_cast<int>(m), k) - penalty;
      }
    }
  }
  std::vector<int> cols(policy_set.size());
  std::iota(cols.begin(), cols.end(), 0);
  return from_game(policy_set, cols, solve_zero_sum(a));
}

GdeResult gde_select(const LayeredMDP& shape, const ConfidenceSet& conf, const FunctionClass& fclass,
                     const Regularizer& reg) {
  if (conf.indices.empty()) throw DomainError("gde_select: empty confidence set");
  GdeResult res;
  const int s1 = shape.initial_state();
  for (int i : conf.indices) {
    const double v = state_value(shape, reg, fclass.members[i], s1);
    if (res.index < 0 || v < res.value) {
      res.index = i;
      res.value = v;
    }
  }
  res.f = fclass.members[res.index];
  res.pi = greedy_policy(shape, reg, res.f);
  return res;
}

double safe_ratio(double num, double den, double zero_tol) {
  if (den <= zero_tol) return num > zero_tol ? kUnbounded : 0.0;
  return num / den;
}

double compute_gdec(const CandidateModelSet& mconf, const QFunction& f_hat) {
  if (mconf.empty()) throw DomainError("compute_gdec: no consistent model");
  const Policy pi = greedy_policy(mconf.shape(), mconf.reg, f_hat);
  double worst = 0.0;
  for (std::size_t m = 0; m < mconf.size(); ++m) {
    const double num = mconf.solved[m].j - policy_values(mconf.models[m], mconf.reg, {pi}).front();
    const double den = std::sqrt(divergence_av(mconf.models[m], mconf.reg, mconf.solved[m].policy, f_hat));
    worst = std::max(worst, safe_ratio(num, den, kRatioZeroDen));
  }
  return worst;
}

double exploitability_ratio(const QFunction& f, const CandidateModelSet& mconf, int tie_cap) {
  if (mconf.empty()) throw DomainError("exploitability_ratio: no consistent model");
  const LayeredMDP& shape = mconf.shape();
  const Regularizer& reg = mconf.reg;
  const std::vector<Policy> greedy =
      reg.inactive() ? tie_variants(shape, f, tie_cap) : std::vector<Policy>{greedy_policy(shape, reg, f)};
  double worst = 0.0;
  for (std::size_t m = 0; m < mconf.size(); ++m) {
    const LayeredMDP& model = mconf.models[m];
    const std::vector<Policy> optimal = reg.inactive() ? tie_variants(model, mconf.solved[m].q, tie_cap)
                                                       : std::vector<Policy>{mconf.solved[m].policy};
    const auto j_greedy = policy_values(model, reg, greedy);
    const auto j_opt = policy_values(model, reg, optimal);
    for (std::size_t o = 0; o < optimal.size(); ++o) {
      const double den = pessimism_gap(model, reg, optimal[o], f);
      for (double jg : j_greedy) worst = std::max(worst, safe_ratio(j_opt[o] - jg, den));
    }
  }
  return worst;
}

double value_gap(const LayeredMDP& shape, const QFunction& f) {
  double gap = kUnbounded;
  for (int s = 0; s < shape.num_states(); ++s) {
    if (shape.num_actions(s) < 2) continue;
    const auto row = shape.row(f, s);
    double first = -kUnbounded;
    double second = -kUnbounded;
    for (double x : row) {
      if (x > first) {
        second = first;
        first = x;
      } else if (x > second) {
        second = x;
      }
    }
    gap = std::min(gap, first - second);
  }
  return gap;
}

double suboptimality(const LayeredMDP& truth, const Regularizer& reg, const MixturePolicy& rho) {
  const double best = solve_optimal(truth, reg).j;
  const auto vals = policy_values(truth, reg, rho.support);
  double got = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) got += rho.weights[i] * vals[i];
  return best - got;
}

DecisionDiagnostics compute_diagnostics(const CandidateModelSet& mconf,
                                        const std::vector<QFunction>& conf_functions,
                                        const PolicySet& policy_set, const QFunction& f_hat,
                                        double gamma) {
  DecisionDiagnostics d;
  d.gamma = gamma;
  d.policy_set = policy_set.description;
  d.ordec_offset = e2dor_offset(mconf, conf_functions, policy_set.policies, gamma).value;
  const auto ratio = e2dor_ratio(mconf, conf_functions, policy_set.policies);
  d.ordec_ratio = ratio.value;
  d.ratio_unbounded = ratio.unbounded;
  d.gdec = compute_gdec(mconf, f_hat);
  d.gdec_unbounded = is_unbounded(d.gdec);
  for (const auto& f : conf_functions) {
    d.er.push_back(exploitability_ratio(f, mconf));
    if (mconf.reg.inactive()) d.gap.push_back(value_gap(mconf.shape(), f));
  }
  return d;
}

}  // namespace offrl
