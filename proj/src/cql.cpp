#include "offrl/cql.hpp"

#include <cmath>
#include <limits>

namespace offrl {

Regularizer CqlConfig::regularizer() const {
  Regularizer reg = Regularizer::shannon(alpha);
  reg.pi_ref = pi_ref;
  return reg;
}

std::vector<std::string> CqlConfig::validate() const {
  std::vector<std::string> findings;
  if (!(lambda > 0.0)) findings.push_back("cql: lambda must be positive");
  if (!(alpha > 0.0)) findings.push_back("cql: alpha must be positive");
  if (gclass.size() == 0) findings.push_back("cql: empty completion class");
  return findings;
}

int empirical_backup_index(const LayeredMDP& mdp, const OfflineDataset& data, const QFunction& f,
                           const FunctionClass& gclass, const Regularizer& reg) {
  if (data.empty()) throw DomainError("empirical_backup: empty dataset");
  if (gclass.size() == 0) throw DomainError("empirical_backup: empty completion class");
  ValueCache vf(mdp, reg, f);
  std::vector<double> y(data.size());
  std::vector<int> idx(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& t = data.tuples[i];
    y[i] = t.r + vf(t.next);
    idx[i] = mdp.sa(t.s, t.a);
  }
  int best = -1;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < gclass.size(); ++k) {
    const auto& g = gclass.members[k];
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double e = g[idx[i]] - y[i];
      total += e * e;
    }
    if (total < best_loss) {
      best_loss = total;
      best = static_cast<int>(k);
    }
  }
  return best;
}

QFunction empirical_backup(const LayeredMDP& mdp, const OfflineDataset& data, const QFunction& f,
                           const FunctionClass& gclass, const Regularizer& reg) {
  return gclass.members[empirical_backup_index(mdp, data, f, gclass, reg)];
}

double pessimism_term(const LayeredMDP& mdp, const OfflineDataset& data, const QFunction& f,
                      const Regularizer& reg) {
  if (data.empty()) throw DomainError("pessimism_term: empty dataset");
  ValueCache vf(mdp, reg, f);
  double total = 0.0;
  for (const auto& t : data.tuples) total += vf(t.s) - f[mdp.sa(t.s, t.a)];
  return total / static_cast<double>(data.size());
}

double cql_objective(const LayeredMDP& mdp, const OfflineDataset& data, const QFunction& f,
                     const QFunction& backup, const Regularizer& reg, double lambda) {
  double residual = 0.0;
  for (const auto& t : data.tuples) {
    const int k = mdp.sa(t.s, t.a);
    const double e = f[k] - backup[k];
    residual += e * e;
  }
  residual /= static_cast<double>(data.size());
  return lambda * pessimism_term(mdp, data, f, reg) + residual;
}

CqlResult cql_select(const LayeredMDP& mdp, const OfflineDataset& data, const FunctionClass& fclass,
                     const CqlConfig& config) {
  if (data.empty()) throw DomainError("cql_select: empty dataset");
  if (fclass.size() == 0) throw DomainError("cql_select: empty function class");
  const auto findings = config.validate();
  if (!findings.empty()) throw ValidationError(findings);
  const Regularizer reg = config.regularizer();
  CqlResult res;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < fclass.size(); ++k) {
    const auto& f = fclass.members[k];
    const auto backup = empirical_backup(mdp, data, f, config.gclass, reg);
    const double obj = cql_objective(mdp, data, f, backup, reg, config.lambda);
    res.objectives.push_back(obj);
    if (obj < best) {
      best = obj;
      res.index = static_cast<int>(k);
    }
  }
  res.f = fclass.members[res.index];
  res.pi = greedy_policy(mdp, reg, res.f);
  return res;
}

bool check_admissible(const LayeredMDP& mdp, const DataDistribution& mu, double tol) {
  if (mu.size() != static_cast<std::size_t>(mdp.num_state_actions())) return false;
  std::vector<double> marginal(static_cast<std::size_t>(mdp.num_states()), 0.0);
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (double x : mdp.row(mu, s)) marginal[s] += x;
  }
  std::vector<double> flow(marginal.size(), 0.0);
  for (int h = 0; h + 1 < mdp.horizon(); ++h) {
    for (int s : mdp.layer(h)) {
      for (int a = 0; a < mdp.num_actions(s); ++a) {
        const double m = mu[mdp.sa(s, a)];
        if (m == 0.0) continue;
        for (const auto& nx : mdp.next(s, a)) flow[nx.state] += m * nx.prob;
      }
    }
    for (int s : mdp.layer(h + 1)) {
      if (std::abs(flow[s] - marginal[s]) > tol) return false;
    }
  }
  return true;
}

}  // namespace offrl
