#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "offrl/common.hpp"
#include "offrl/regularizer.hpp"

namespace offrl {

enum class RewardNoise : std::uint8_t { Deterministic, Bernoulli };

struct Successor {
  int state;
  double prob;
};

/// Finite-horizon layered MDP with globally indexed states.
///
/// Each state owns its own action count; state-action pairs are addressed
/// through the flat index `sa(s, a)`, which is how every table in the library
/// is laid out.
class LayeredMDP {
 public:
  LayeredMDP() = default;
  LayeredMDP(std::vector<std::vector<int>> layers, std::vector<int> num_actions);

  /// Convenience: every state gets `actions` actions.
  static LayeredMDP uniform(std::vector<std::vector<int>> layers, int actions);

  void set_reward(int s, int a, double mean, RewardNoise noise = RewardNoise::Deterministic);
  /// Replaces the successor row of (s, a).
  void set_transition(int s, int a, std::span<const Successor> next);
  void set_transition(int s, int a, std::initializer_list<Successor> next) {
    set_transition(s, a, std::span<const Successor>(next.begin(), next.size()));
  }
  void set_extended_reward_range(bool on) { extended_range_ = on; }

  int num_states() const { return static_cast<int>(layer_of_.size()); }
  int num_state_actions() const { return offset_.empty() ? 0 : offset_.back(); }
  int horizon() const { return static_cast<int>(layers_.size()); }
  int initial_state() const { return layers_.empty() ? -1 : layers_.front().front(); }
  const std::vector<std::vector<int>>& layers() const { return layers_; }
  const std::vector<int>& layer(int h) const { return layers_[static_cast<std::size_t>(h)]; }
  /// Zero-based layer index of s.
  int layer_of(int s) const { return layer_of_[static_cast<std::size_t>(s)]; }
  bool is_terminal(int s) const { return layer_of(s) == horizon() - 1; }
  int num_actions(int s) const { return offset_[s + 1] - offset_[s]; }
  int max_actions() const;
  int sa(int s, int a) const { return offset_[static_cast<std::size_t>(s)] + a; }
  int sa_begin(int s) const { return offset_[static_cast<std::size_t>(s)]; }

  double reward(int s, int a) const { return reward_[static_cast<std::size_t>(sa(s, a))]; }
  RewardNoise noise(int s, int a) const { return noise_[static_cast<std::size_t>(sa(s, a))]; }
  std::span<const Successor> next(int s, int a) const;
  bool extended_reward_range() const { return extended_range_; }

  /// Row view of a flat state-action table.
  std::span<const double> row(const SATable& t, int s) const {
    return {t.data() + offset_[s], static_cast<std::size_t>(num_actions(s))};
  }
  std::span<double> row(SATable& t, int s) const {
    return {t.data() + offset_[s], static_cast<std::size_t>(num_actions(s))};
  }

  /// True when both MDPs share states, layers and action counts.
  bool same_shape(const LayeredMDP& other) const;

  /// Every invariant violation, each naming its location.
  std::vector<std::string> validate() const;
  /// Throws ValidationError if validate() reports anything.
  void check() const;

 private:
  std::vector<std::vector<int>> layers_;
  std::vector<int> layer_of_;
  std::vector<int> offset_;
  std::vector<double> reward_;
  std::vector<RewardNoise> noise_;
  std::vector<std::int64_t> row_begin_;
  std::vector<int> row_len_;
  std::vector<Successor> succ_;
  bool extended_range_ = false;
};

struct ValueSolution {
  SATable q;
  std::vector<double> v;
  Policy policy;
  double j = 0.0;
};

struct OccupancyMeasure {
  SATable d;
  std::vector<double> d_state;
};

/// Backward induction with the regularized inner maximization.
ValueSolution solve_optimal(const LayeredMDP& mdp, const Regularizer& reg);

/// Q, V and J of a fixed policy, charging psi(pi; s) at every visited state.
ValueSolution policy_evaluation(const LayeredMDP& mdp, const Regularizer& reg, const Policy& pi);

OccupancyMeasure occupancy(const LayeredMDP& mdp, const Policy& pi);

/// max d(s,a) / (H mu(s,a)); kUnbounded if d > 0 where mu = 0.
double coverage_coefficient(const LayeredMDP& mdp, const Policy& pi, const DataDistribution& mu);

/// Regularized state values f(s) = max_p <p, f(s,.)> - psi(p; s).
std::vector<double> state_values(const LayeredMDP& mdp, const Regularizer& reg, const QFunction& f);
double state_value(const LayeredMDP& mdp, const Regularizer& reg, const QFunction& f, int s);

/// [T f](s,a) = R(s,a) + E f(s'), with f(s') = 0 past the last layer.
QFunction bellman_apply(const LayeredMDP& mdp, const Regularizer& reg, const QFunction& f);

/// Regularized-greedy policy pi_f.
Policy greedy_policy(const LayeredMDP& mdp, const Regularizer& reg, const QFunction& f);

Policy uniform_policy(const LayeredMDP& mdp);
/// One action per state (states with a single action ignore the entry).
Policy deterministic_policy(const LayeredMDP& mdp, const std::vector<int>& actions);

/// Findings for rows that are not distributions.
std::vector<std::string> validate_policy(const LayeredMDP& mdp, const Policy& pi);

/// max over (s,a) of |Q - (R + E V')| and |V - (<pi,Q> - psi)| for a solution.
double bellman_residual(const LayeredMDP& mdp, const Regularizer& reg, const ValueSolution& sol);

double sup_distance(const SATable& a, const SATable& b);

}  // namespace offrl
