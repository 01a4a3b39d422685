#pragma once

#include <string>
#include <vector>

#include "offrl/estimation.hpp"
#include "offrl/game.hpp"
#include "offrl/mdp.hpp"

namespace offrl {

/// Finite candidate universe of MDPs sharing one shape and one regularizer.
struct CandidateModelSet {
  std::vector<LayeredMDP> models;
  std::vector<std::string> names;
  Regularizer reg;
  /// Optimal solution per model, filled by solve().
  std::vector<ValueSolution> solved;

  std::size_t size() const { return models.size(); }
  bool empty() const { return models.empty(); }
  const LayeredMDP& shape() const { return models.front(); }

  void add(LayeredMDP m, std::string name);
  /// Solves every model that has no cached solution yet.
  void solve();
  std::vector<std::string> validate() const;
};

struct MixturePolicy {
  std::vector<Policy> support;
  std::vector<double> weights;

  /// Index of the heaviest support entry (lowest index on ties).
  int heaviest() const;
};

/// Finite policy set together with a description of how it was formed.
struct PolicySet {
  std::vector<Policy> policies;
  std::string description;
  bool enumerated = false;
};

/// Product of action counts over states with more than one action,
/// saturating at `cap + 1`.
long long deterministic_policy_count(const LayeredMDP& mdp, long long cap);

/// All deterministic Markov policies. Mixed-radix order, the last decision
/// state varying fastest. Throws DomainError above `limit`.
std::vector<Policy> enumerate_deterministic(const LayeredMDP& mdp, long long limit = 20000);

/// Deterministic enumeration when at most `limit` policies exist and the
/// regularizer admits vertices, always extended by {pi_M}, {pi_f} and the
/// uniform policy. Exact duplicates are dropped.
PolicySet build_policy_set(const CandidateModelSet& mconf, const std::vector<QFunction>& conf_functions,
                           long long limit = 20000);

/// J_M(pi) for each policy (regularization cost included).
std::vector<double> policy_values(const LayeredMDP& mdp, const Regularizer& reg,
                                  const std::vector<Policy>& policies);

/// (E_{d^pi_M} [f(s,a) - R(s,a) - E f(s')])^2.
double divergence_av(const LayeredMDP& model, const Regularizer& reg, const Policy& pi,
                     const QFunction& f);

/// E_{d^pi_M}[f(s) - f(s,a) + psi(pi; s)], f's own assessment of pi.
double pessimism_gap(const LayeredMDP& model, const Regularizer& reg, const Policy& pi, const QFunction& f);

/// Keeps models whose Q* lies within `tol` (sup norm) of a confidence-set member.
CandidateModelSet induce_model_set(const CandidateModelSet& cands, const ConfidenceSet& conf,
                                   const FunctionClass& fclass, double tol);

/// Confidence-set members as a plain list.
std::vector<QFunction> conf_members(const ConfidenceSet& conf, const FunctionClass& fclass);

struct DecisionResult {
  MixturePolicy rho;
  /// Weights aligned with the policy set.
  std::vector<double> weights;
  double value = 0.0;
  /// Duality gap of the solved game (0 when no game was needed).
  double gap = 0.0;
  bool unbounded = false;
};

/// min_rho max_M E_rho[J_M(pi_M) - J_M(pi)] - gamma max_f D(pi_M).
DecisionResult e2dor_offset(const CandidateModelSet& mconf, const std::vector<QFunction>& conf_functions,
                            const std::vector<Policy>& policy_set, double gamma);

/// min_rho max_M (J_M(pi_M) - E_rho J_M(pi)) / sqrt(max_f D(pi_M)).
///
/// The denominator does not depend on rho, so dividing each model's row by
/// it leaves an ordinary matrix game with the same minimizer. Models with a
/// zero denominator instead restrict rho to policies they cannot fault;
/// if no such policy exists the value is kUnbounded.
DecisionResult e2dor_ratio(const CandidateModelSet& mconf, const std::vector<QFunction>& conf_functions,
                           const std::vector<Policy>& policy_set);

/// Offset game whose maximizer picks a model and a comparator policy.
DecisionResult e2dor_arbitrary_comparator(const CandidateModelSet& mconf,
                                          const std::vector<QFunction>& conf_functions,
                                          const std::vector<Policy>& policy_set,
                                          const std::vector<Policy>& comparators, double gamma);

struct GdeResult {
  int index = -1;  ///< member index in the function class
  QFunction f;
  Policy pi;
  double value = 0.0;  ///< f(s_1)
};

/// argmin over the confidence set of f(s_1); lowest member index on ties.
GdeResult gde_select(const LayeredMDP& shape, const ConfidenceSet& conf, const FunctionClass& fclass,
                     const Regularizer& reg);

/// max_M (J_M(pi_M) - J_M(pi_fhat)) / sqrt(D^{pi_M}(fhat || M)).
double compute_gdec(const CandidateModelSet& mconf, const QFunction& f_hat);

/// Worst-case ratio of model advantage over pi_f to f's own assessment of
/// pi_M. With psi == 0, tied greedy choices for pi_f and pi_M are enumerated
/// (at most `tie_cap` variants each).
double exploitability_ratio(const QFunction& f, const CandidateModelSet& mconf, int tie_cap = 256);

/// min over multi-action states of best minus second-best f(s, .);
/// kUnbounded when no state has two actions.
double value_gap(const LayeredMDP& shape, const QFunction& f);

/// J(pi*) - sum_i w_i J(pi_i) under the truth.
double suboptimality(const LayeredMDP& truth, const Regularizer& reg, const MixturePolicy& rho);

/// Ratio with the 0/0 := 0 and x/0 := kUnbounded conventions.
double safe_ratio(double num, double den, double zero_tol = 1e-12);

struct DecisionDiagnostics {
  double gamma = 0.0;
  double ordec_offset = 0.0;
  double ordec_ratio = 0.0;
  double gdec = 0.0;
  std::vector<double> er;   ///< per confidence-set member
  std::vector<double> gap;  ///< per confidence-set member (empty when psi != 0)
  std::string policy_set;
  bool ratio_unbounded = false;
  bool gdec_unbounded = false;
};

DecisionDiagnostics compute_diagnostics(const CandidateModelSet& mconf,
                                        const std::vector<QFunction>& conf_functions,
                                        const PolicySet& policy_set, const QFunction& f_hat,
                                        double gamma);

}  // namespace offrl
