#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "offrl/mdp.hpp"
#include "offrl/rng.hpp"

namespace offrl {

/// One (s, a, r, s') record; `next` is -1 after the last layer.
struct Transition {
  int s = 0;
  int a = 0;
  double r = 0.0;
  int next = -1;

  bool operator==(const Transition&) const = default;
};

struct OfflineDataset {
  std::vector<Transition> tuples;
  std::uint64_t seed = 0;
  std::string mu_tag;
  std::string mdp_hash;

  std::size_t size() const { return tuples.size(); }
  bool empty() const { return tuples.empty(); }
};

/// Mixture over a finite policy list.
struct PolicyMixture {
  std::vector<Policy> policies;
  std::vector<double> weights;
};

struct DoubleSampleDataset {
  std::vector<std::pair<Transition, Transition>> pairs;
  /// Index of the policy drawn for each pair.
  std::vector<int> policy_index;
  std::string mixture_tag;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

/// Samples reward and successor for (s, a).
Transition draw_transition(const LayeredMDP& mdp, int s, int a, Rng& rng);

/// n i.i.d. tuples with (s, a) ~ mu.
OfflineDataset sample_dataset(const LayeredMDP& mdp, const DataDistribution& mu, std::size_t n,
                              std::uint64_t seed);

/// n pairs; per pair a policy is drawn from the mixture, then each slot draws
/// a layer uniformly and (s, a) from the occupancy of that layer.
DoubleSampleDataset sample_double_policy_dataset(const LayeredMDP& mdp, const PolicyMixture& mix,
                                                 std::size_t n, std::uint64_t seed);

/// d^pi / H, a distribution over state-action pairs.
DataDistribution occupancy_distribution(const LayeredMDP& mdp, const Policy& pi);

/// w(s,a) = d^pi(s,a) / (H mu(s,a)); requires full support where d > 0.
SATable exact_weight(const LayeredMDP& mdp, const Policy& pi, const DataDistribution& mu);

/// X(pi): occupancy over (s, a) followed by the next-state marginal over s'.
std::vector<double> bellman_rank_features(const LayeredMDP& mdp, const Policy& pi);
/// W(f): residual part f - R over (s, a) followed by -f(s') over s'.
std::vector<double> bellman_rank_weights(const LayeredMDP& mdp, const Regularizer& reg,
                                         const QFunction& f);

/// X(target)^T Sigma^+ X(target) with Sigma = E_{pi ~ mix} X(pi) X(pi)^T;
/// kUnbounded when X(target) leaves the range of Sigma.
double policy_feature_coverage(const LayeredMDP& mdp, const PolicyMixture& mix,
                               const Policy& target);

std::vector<std::string> validate_distribution(const LayeredMDP& mdp, const DataDistribution& mu);
std::vector<std::string> validate_mixture(const LayeredMDP& mdp, const PolicyMixture& mix);

}  // namespace offrl
