#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "offrl/data.hpp"
#include "offrl/decision.hpp"
#include "offrl/estimation.hpp"

namespace offrl {

/// Named by the (first-layer, terminal) action pair on the top branch.
enum class HardFamily { UX, UY, VX, VY };

std::string to_string(HardFamily f);
HardFamily hard_family_from_string(const std::string& name);
inline constexpr HardFamily kAllFamilies[] = {HardFamily::UX, HardFamily::UY, HardFamily::VX,
                                              HardFamily::VY};

/// Action indices.
inline constexpr int kActU = 0;
inline constexpr int kActV = 1;
inline constexpr int kActX = 0;
inline constexpr int kActY = 1;
inline constexpr int kActZ = 2;

/// Three-layer instance s_1 -> W -> {s_A, s_B}, optionally preceded by the
/// s_0 prefix of the epsilon extension.
///
/// State layout of the base instance: s_1 = 0, W = 1..2m, s_A = 2m + 1,
/// s_B = 2m + 2. The extension prepends s_0 and appends the zero chain; the
/// indices below always refer to the current MDP.
struct HardInstance {
  HardFamily family = HardFamily::UX;
  int m = 1;
  double delta = 0.0;
  std::uint64_t seed = 0;
  /// in_a[i] is true when the i-th W state belongs to W_A.
  std::vector<char> in_a;

  LayeredMDP mdp;
  FunctionClass fclass;
  DataDistribution mu;
  /// Index of Q* in fclass.
  int truth_index = 0;

  int s0 = -1;
  int s1 = 0;
  int w_begin = 1;
  int s_a = 0;
  int s_b = 0;
  std::vector<int> chain;  ///< zero-reward chain of the extension
  double eps = 0.0;        ///< 0 for the base instance
  double p = 1.0;          ///< probability of entering s_1

  std::vector<int> w_a;  ///< members of W_A (state indices)
  std::vector<int> w_b;

  /// First-layer action leading to W_B.
  int lower_action() const;
  /// Optimal policy that follows the lowest branch and plays z at s_A, s_B.
  Policy lowest_branch_policy() const;
  /// Behavior policy: uniform over {u, v}, z at s_A and s_B.
  Policy behavior_policy() const;
  /// Deterministic policy from first-layer and terminal actions.
  Policy make_policy(int a1, int a_sa, int a_sb) const;
  /// J of the optimal policy as derived from the construction.
  double expected_optimal_value() const;
};

struct HardnessCertificate {
  bool realizable = false;
  bool bellman_complete = false;
  double coverage = 0.0;
  double optimal_value = 0.0;
  /// |J(lowest branch) - J*|, confirming the certified policy is optimal.
  double policy_gap = 0.0;
  bool structure_valid = false;

  bool ok(double tol = 1e-9) const;
};

/// Uniformly random balanced assignment of W to {W_A, W_B} (seeded).
std::vector<char> sample_assignment(int m, std::uint64_t seed);
/// First m states in W_A.
std::vector<char> canonical_assignment(int m);

HardInstance build_hard_instance(HardFamily family, int m, double delta, std::uint64_t seed);
HardInstance build_hard_instance(HardFamily family, int m, double delta, std::vector<char> in_a);

HardnessCertificate certify(const HardInstance& inst);

/// Prepends s_0 entering s_1 with probability 4 eps, else a zero-reward chain.
HardInstance build_eps_extension(const HardInstance& inst, double eps);

/// D_1, D_2, D_3 with n tuples each, in that order.
OfflineDataset sample_hard_dataset(const HardInstance& inst, std::size_t n, std::uint64_t seed);

/// Policy of a proxy instance transferred to another instance of the same
/// family layout (actions at s_1, s_A, s_B are copied).
Policy lift_policy(const HardInstance& from, const Policy& pi, const HardInstance& to);

struct HardnessConfig {
  int m = 1000;
  double delta = 0.0;
  std::vector<std::size_t> n_grid{100};
  std::vector<std::string> algorithms{"bc-gde", "bc-e2dor-offset", "bc-e2dor-ratio", "prior-uniform"};
  int seeds = 10;
  std::uint64_t base_seed = 1;
  double conf_delta = 0.1;
  /// Offset weight; a negative value selects sqrt(n).
  double gamma = -1.0;
  int jobs = 1;

  std::vector<std::string> validate() const;
};

struct HardnessRun {
  std::string algorithm;
  std::size_t n = 0;
  int m = 0;
  double delta = 0.0;
  int seed = 0;
  HardFamily family = HardFamily::UX;
  double suboptimality = 0.0;
};

struct HardnessSummary {
  std::string algorithm;
  std::size_t n = 0;
  int count = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

/// Names accepted in HardnessConfig::algorithms.
const std::vector<std::string>& hardness_algorithms();

/// One (n, seed) task: draw family and assignment, sample data, run every
/// configured pipeline. Rows follow the order of config.algorithms.
std::vector<HardnessRun> hardness_run(const HardnessConfig& config, std::size_t n, int seed);

/// All tasks, ordered by (n, seed, algorithm); `jobs` worker threads.
std::vector<HardnessRun> hardness_experiment(const HardnessConfig& config);

std::vector<HardnessSummary> summarize(const std::vector<HardnessRun>& runs);

}  // namespace offrl
