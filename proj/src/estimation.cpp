#include "offrl/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace offrl {

namespace {

void require_nonempty(std::size_t n, const char* what) {
  if (n == 0) throw DomainError(std::string(what) + ": empty dataset");
}

// r + f(s') for every tuple.
std::vector<double> targets(const LayeredMDP& mdp, const OfflineDataset& data, const QFunction& f,
                            const Regularizer& reg) {
  ValueCache vf(mdp, reg, f);
  std::vector<double> y(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& t = data.tuples[i];
    y[i] = t.r + vf(t.next);
  }
  return y;
}

std::vector<int> sa_index(const LayeredMDP& mdp, const OfflineDataset& data) {
  std::vector<int> idx(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) idx[i] = mdp.sa(data.tuples[i].s, data.tuples[i].a);
  return idx;
}

double mean_squared(const QFunction& g, const std::vector<int>& idx, const std::vector<double>& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = g[idx[i]] - y[i];
    total += e * e;
  }
  return total / static_cast<double>(y.size());
}

double abs_weighted_mean(const SATable& w, const QFunction& f, const std::vector<int>& idx,
                         const std::vector<double>& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total += w[idx[i]] * (f[idx[i]] - y[i]);
  return std::abs(total / static_cast<double>(y.size()));
}

void select(ConfidenceSet& cs) {
  cs.indices.clear();
  for (std::size_t i = 0; i < cs.losses.size(); ++i) {
    if (cs.losses[i] <= cs.eps_stat) cs.indices.push_back(static_cast<int>(i));
  }
}

}  // namespace

void FunctionClass::add(QFunction f, std::string name) {
  members.push_back(std::move(f));
  names.push_back(std::move(name));
}

int FunctionClass::find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::string to_string(ConfMethod m) {
  switch (m) {
    case ConfMethod::BC:
      return "bc";
    case ConfMethod::WR:
      return "wr";
    case ConfMethod::BR:
      return "br";
  }
  return "bc";
}

bool ConfidenceSet::contains(int i) const {
  return std::binary_search(indices.begin(), indices.end(), i);
}

double eps_bc(int horizon, std::size_t nf, std::size_t ng, double delta, std::size_t n) {
  const double H = horizon;
  return 2.0 * H * H * std::log(static_cast<double>(nf) * static_cast<double>(ng) / delta) /
         static_cast<double>(n);
}

double eps_wr(double b_w, int horizon, std::size_t nf, std::size_t nw, double delta,
              std::size_t n) {
  return b_w * horizon *
         std::sqrt(2.0 * std::log(static_cast<double>(nf) * static_cast<double>(nw) / delta) /
                   static_cast<double>(n));
}

double eps_br(int horizon, std::size_t nf, double delta, std::size_t n) {
  return horizon *
         std::sqrt(std::log(2.0 * static_cast<double>(nf) / delta) / (2.0 * static_cast<double>(n)));
}

ValueCache::ValueCache(const LayeredMDP& mdp, const Regularizer& reg, const QFunction& f)
    : mdp_(mdp),
      reg_(reg),
      f_(f),
      v_(static_cast<std::size_t>(mdp.num_states()), 0.0),
      done_(static_cast<std::size_t>(mdp.num_states()), 0) {}

double ValueCache::operator()(int s) {
  if (s < 0) return 0.0;
  if (!done_[s]) {
    v_[s] = state_value(mdp_, reg_, f_, s);
    done_[s] = 1;
  }
  return v_[s];
}

double loss_bc(const LayeredMDP& mdp, const OfflineDataset& data, const QFunction& g,
               const QFunction& f, const Regularizer& reg) {
  require_nonempty(data.size(), "loss_bc");
  return mean_squared(g, sa_index(mdp, data), targets(mdp, data, f, reg));
}

ConfidenceSet build_conf_bc(const LayeredMDP& mdp, const OfflineDataset& data,
                            const FunctionClass& fclass, const FunctionClass& gclass,
                            const Regularizer& reg, double delta) {
  require_nonempty(data.size(), "build_conf_bc");
  if (fclass.size() == 0 || gclass.size() == 0) throw DomainError("build_conf_bc: empty class");
  ConfidenceSet cs;
  cs.method = ConfMethod::BC;
  cs.delta = delta;
  cs.eps_stat = eps_bc(mdp.horizon(), fclass.size(), gclass.size(), delta, data.size());
  const auto idx = sa_index(mdp, data);
  cs.losses.resize(fclass.size());
  for (std::size_t k = 0; k < fclass.size(); ++k) {
    const auto y = targets(mdp, data, fclass.members[k], reg);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : gclass.members) best = std::min(best, mean_squared(g, idx, y));
    cs.losses[k] = mean_squared(fclass.members[k], idx, y) - best;
  }
  select(cs);
  return cs;
}

double loss_wr(const LayeredMDP& mdp, const OfflineDataset& data, const SATable& w,
               const QFunction& f, const Regularizer& reg) {
  require_nonempty(data.size(), "loss_wr");
  return abs_weighted_mean(w, f, sa_index(mdp, data), targets(mdp, data, f, reg));
}

ConfidenceSet build_conf_wr(const LayeredMDP& mdp, const OfflineDataset& data,
                            const FunctionClass& fclass, const WeightClass& wclass,
                            const Regularizer& reg, double delta) {
  require_nonempty(data.size(), "build_conf_wr");
  if (wclass.size() == 0) throw DomainError("build_conf_wr: empty weight class");
  if (fclass.size() == 0) throw DomainError("build_conf_wr: empty function class");
  ConfidenceSet cs;
  cs.method = ConfMethod::WR;
  cs.delta = delta;
  cs.eps_stat = eps_wr(wclass.b_w, mdp.horizon(), fclass.size(), wclass.size(), delta, data.size());
  const auto idx = sa_index(mdp, data);
  cs.losses.resize(fclass.size());
  for (std::size_t k = 0; k < fclass.size(); ++k) {
    const auto y = targets(mdp, data, fclass.members[k], reg);
    double worst = 0.0;
    for (const auto& w : wclass.members) {
      worst = std::max(worst, abs_weighted_mean(w, fclass.members[k], idx, y));
    }
    cs.losses[k] = worst;
  }
  select(cs);
  return cs;
}

double loss_br(const LayeredMDP& mdp, const DoubleSampleDataset& pairs, const QFunction& f,
               const Regularizer& reg) {
  require_nonempty(pairs.size(), "loss_br");
  ValueCache vf(mdp, reg, f);
  auto residual = [&](const Transition& t) { return f[mdp.sa(t.s, t.a)] - t.r - vf(t.next); };
  double total = 0.0;
  for (const auto& [first, second] : pairs.pairs) total += residual(first) * residual(second);
  return total / static_cast<double>(pairs.size());
}

ConfidenceSet build_conf_br(const LayeredMDP& mdp, const DoubleSampleDataset& pairs,
                            const FunctionClass& fclass, const Regularizer& reg, double delta) {
  require_nonempty(pairs.size(), "build_conf_br");
  if (fclass.size() == 0) throw DomainError("build_conf_br: empty function class");
  ConfidenceSet cs;
  cs.method = ConfMethod::BR;
  cs.delta = delta;
  cs.eps_stat = eps_br(mdp.horizon(), fclass.size(), delta, pairs.size());
  cs.losses.resize(fclass.size());
  for (std::size_t k = 0; k < fclass.size(); ++k) {
    cs.losses[k] = loss_br(mdp, pairs, fclass.members[k], reg);
  }
  select(cs);
  return cs;
}

ConfidenceSet full_confidence_set(const FunctionClass& fclass) {
  ConfidenceSet cs;
  cs.eps_stat = kUnbounded;
  cs.losses.assign(fclass.size(), 0.0);
  for (std::size_t i = 0; i < fclass.size(); ++i) cs.indices.push_back(static_cast<int>(i));
  return cs;
}

std::vector<int> completion_map(const LayeredMDP& mdp, const Regularizer& reg,
                                const FunctionClass& fclass, const FunctionClass& gclass,
                                double tol) {
  std::vector<int> out(fclass.size(), -1);
  for (std::size_t k = 0; k < fclass.size(); ++k) {
    const auto tf = bellman_apply(mdp, reg, fclass.members[k]);
    for (std::size_t j = 0; j < gclass.size(); ++j) {
      if (sup_distance(tf, gclass.members[j]) <= tol) {
        out[k] = static_cast<int>(j);
        break;
      }
    }
  }
  return out;
}

bool verify_completeness(const LayeredMDP& mdp, const Regularizer& reg,
                         const FunctionClass& fclass, const FunctionClass& gclass, double tol) {
  const auto map = completion_map(mdp, reg, fclass, gclass, tol);
  return std::none_of(map.begin(), map.end(), [](int j) { return j < 0; });
}

std::vector<std::string> validate_function_class(const LayeredMDP& mdp, const FunctionClass& fc) {
  std::vector<std::string> findings;
  if (fc.members.empty()) findings.push_back("function class: no members");
  if (fc.names.size() != fc.members.size()) findings.push_back("function class: label count mismatch");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < fc.members.size(); ++i) {
    const std::string label = i < fc.names.size() ? fc.names[i] : std::to_string(i);
    if (!seen.insert(label).second) findings.push_back("function class: duplicate label '" + label + "'");
    if (fc.members[i].size() != static_cast<std::size_t>(mdp.num_state_actions())) {
      findings.push_back("function class: member '" + label + "' has " +
                         std::to_string(fc.members[i].size()) + " entries, expected " +
                         std::to_string(mdp.num_state_actions()));
      continue;
    }
    for (double x : fc.members[i]) {
      if (!std::isfinite(x)) {
        findings.push_back("function class: member '" + label + "' has a non-finite entry");
        break;
      }
    }
  }
  return findings;
}

}  // namespace offrl
