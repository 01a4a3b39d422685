#pragma once

#include <vector>

#include "offrl/data.hpp"
#include "offrl/estimation.hpp"

namespace offrl {

struct CqlConfig {
  double lambda = 1.0;
  /// KL weight; the reference rows follow Regularizer::pi_ref conventions.
  double alpha = 1.0;
  std::vector<std::vector<double>> pi_ref;
  FunctionClass gclass;

  Regularizer regularizer() const;
  std::vector<std::string> validate() const;
};

/// Index of argmin_g mean (g(s,a) - r - f(s'))^2 over G, lowest index on ties.
int empirical_backup_index(const LayeredMDP& mdp, const OfflineDataset& data, const QFunction& f,
                           const FunctionClass& gclass, const Regularizer& reg);
QFunction empirical_backup(const LayeredMDP& mdp, const OfflineDataset& data, const QFunction& f,
                           const FunctionClass& gclass, const Regularizer& reg);

/// Mean of f(s) - f(s,a) over the data.
double pessimism_term(const LayeredMDP& mdp, const OfflineDataset& data, const QFunction& f,
                      const Regularizer& reg);

/// lambda * mean(f(s) - f(s,a)) + mean (f(s,a) - backup(s,a))^2.
double cql_objective(const LayeredMDP& mdp, const OfflineDataset& data, const QFunction& f,
                     const QFunction& backup, const Regularizer& reg, double lambda);

struct CqlResult {
  int index = -1;
  QFunction f;
  Policy pi;
  std::vector<double> objectives;  ///< per member of F
};

/// Exhaustive argmin of the objective over F (lowest index on ties).
CqlResult cql_select(const LayeredMDP& mdp, const OfflineDataset& data, const FunctionClass& fclass,
                     const CqlConfig& config);

/// Layer-to-layer flow check: sum_{s in S_h, a} mu(s,a) P(s'|s,a) equals the
/// state marginal mu(s') for every s' in S_{h+1}, within tol.
bool check_admissible(const LayeredMDP& mdp, const DataDistribution& mu, double tol = 1e-10);

}  // namespace offrl
