#pragma once

#include <cstdint>
#include <vector>

#include "offrl/cql.hpp"
#include "offrl/data.hpp"
#include "offrl/decision.hpp"
#include "offrl/estimation.hpp"
#include "offrl/rng.hpp"

namespace offrl {

struct RandomMdpSpec {
  /// States per layer; the first entry is forced to 1.
  std::vector<int> layer_sizes{1, 2, 2};
  int min_actions = 2;
  int max_actions = 2;
  /// Maximum successors per (s, a); 0 means the whole next layer.
  int max_support = 0;
  bool bernoulli_rewards = false;
};

LayeredMDP random_mdp(const RandomMdpSpec& spec, Rng& rng);
/// Same transitions as `base` with rewards redrawn on a random subset of
/// state-action pairs (probability `fraction` each).
LayeredMDP perturb_rewards(const LayeredMDP& base, double fraction, Rng& rng);
/// Fresh rewards and transitions on the shape of `base`.
LayeredMDP redraw_model(const LayeredMDP& base, const RandomMdpSpec& spec, Rng& rng);

/// Rows drawn uniformly from the simplex interior.
Policy random_policy(const LayeredMDP& mdp, Rng& rng);
Policy random_deterministic_policy(const LayeredMDP& mdp, Rng& rng);
QFunction random_function(const LayeredMDP& mdp, double lo, double hi, Rng& rng);
/// Interior reference rows for a regularizer.
std::vector<std::vector<double>> random_reference(const LayeredMDP& mdp, Rng& rng);
/// Random distribution over state-action pairs with full support.
DataDistribution random_distribution(const LayeredMDP& mdp, Rng& rng);

/// Single-state bandit worlds realizing two Q-functions f_x and f_y.
struct BanditWorlds {
  CandidateModelSet models;  ///< one model per function, in class order
  FunctionClass fclass;
};

/// Actions x, y with f_x = (1, 0) and f_y = (1/2 - delta, 1/2 + delta).
BanditWorlds robust_choice_bandit(double delta);
/// Actions x, y, z with f_x = (1, 0, 1 - delta) and f_y = (0, 1, 1 - delta).
BanditWorlds hedging_bandit(double delta);

inline constexpr int kBanditX = 0;
inline constexpr int kBanditY = 1;
inline constexpr int kBanditZ = 2;

/// Shannon-regularized instance whose data distribution is the occupancy of
/// the soft-optimal policy, so Q* minimizes the pessimism term.
struct CqlInstance {
  LayeredMDP mdp;
  Regularizer reg;
  DataDistribution mu;
  FunctionClass fclass;  ///< Q* first, then Q* of reward-perturbed models
  FunctionClass gclass;  ///< {T f : f in F} followed by F
  ValueSolution optimal;
};

CqlInstance cql_canonical_instance(std::uint64_t seed = 7, double alpha = 0.2, int alternatives = 8);

/// Instance for the statistical coverage checks of the three confidence-set
/// constructions. F holds Q* (index `truth`) and Q* of perturbed models.
struct ConfidenceInstance {
  LayeredMDP mdp;
  Regularizer reg;
  FunctionClass fclass;
  FunctionClass gclass;  ///< completion class {T f} followed by F
  int truth = 0;
  DataDistribution mu;
  WeightClass wclass;  ///< contains the exact weight of pi*
  PolicyMixture mixture;
};

ConfidenceInstance confidence_canonical_instance(std::uint64_t seed = 11);

/// Random model universe for the decision-rule property suite: the truth is
/// model 0, F holds every model's Q*, and the confidence set is an exact
/// random subset containing Q* of the truth.
struct DecisionInstance {
  CandidateModelSet universe;
  FunctionClass fclass;
  ConfidenceSet conf;
  CandidateModelSet mconf;
  std::vector<QFunction> conf_functions;
  PolicySet policies;
};

DecisionInstance random_decision_instance(Rng& rng, const Regularizer& reg, int max_states = 8,
                                          int max_actions = 3, int max_models = 4);

}  // namespace offrl
