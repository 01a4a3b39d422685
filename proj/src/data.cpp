#include "offrl/data.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace offrl {

namespace {

// Cumulative sampler over a nonnegative weight vector.
class CumulativeSampler {
 public:
  explicit CumulativeSampler(const std::vector<double>& w) : cum_(w.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc += std::max(w[i], 0.0);
      cum_[i] = acc;
    }
  }

  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform() * cum_.back();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.end()) --it;
    return static_cast<std::size_t>(it - cum_.begin());
  }

 private:
  std::vector<double> cum_;
};

std::vector<std::pair<int, int>> sa_pairs(const LayeredMDP& mdp) {
  std::vector<std::pair<int, int>> out(static_cast<std::size_t>(mdp.num_state_actions()));
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(s); ++a) out[mdp.sa(s, a)] = {s, a};
  }
  return out;
}

}  // namespace

Transition draw_transition(const LayeredMDP& mdp, int s, int a, Rng& rng) {
  Transition t;
  t.s = s;
  t.a = a;
  const double mean = mdp.reward(s, a);
  t.r = mdp.noise(s, a) == RewardNoise::Bernoulli ? (rng.bernoulli(mean) ? 1.0 : 0.0) : mean;
  const auto row = mdp.next(s, a);
  if (row.empty()) {
    t.next = -1;
    return t;
  }
  const double u = rng.uniform();
  double acc = 0.0;
  t.next = row.back().state;
  for (const auto& nx : row) {
    acc += nx.prob;
    if (u < acc && nx.prob > 0.0) {
      t.next = nx.state;
      break;
    }
  }
  return t;
}

OfflineDataset sample_dataset(const LayeredMDP& mdp, const DataDistribution& mu, std::size_t n,
                              std::uint64_t seed) {
  OfflineDataset data;
  data.seed = seed;
  if (n == 0) return data;
  const auto pairs = sa_pairs(mdp);
  const CumulativeSampler sampler(mu);
  Rng rng(seed);
  data.tuples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [s, a] = pairs[sampler.draw(rng)];
    data.tuples.push_back(draw_transition(mdp, s, a, rng));
  }
  return data;
}

DoubleSampleDataset sample_double_policy_dataset(const LayeredMDP& mdp, const PolicyMixture& mix,
                                                 std::size_t n, std::uint64_t seed) {
  DoubleSampleDataset data;
  if (n == 0) return data;
  const auto pairs = sa_pairs(mdp);
  const int H = mdp.horizon();
  // Per policy and layer, a sampler over that layer's state-action cells.
  std::vector<std::vector<std::vector<int>>> cells(mix.policies.size());
  std::vector<std::vector<CumulativeSampler>> samplers(mix.policies.size());
  for (std::size_t k = 0; k < mix.policies.size(); ++k) {
    const auto occ = occupancy(mdp, mix.policies[k]);
    cells[k].resize(static_cast<std::size_t>(H));
    for (int h = 0; h < H; ++h) {
      std::vector<double> w;
      for (int s : mdp.layer(h)) {
        for (int a = 0; a < mdp.num_actions(s); ++a) {
          cells[k][h].push_back(mdp.sa(s, a));
          w.push_back(occ.d[mdp.sa(s, a)]);
        }
      }
      samplers[k].emplace_back(w);
    }
  }
  Rng rng(seed);
  data.pairs.reserve(n);
  data.policy_index.reserve(n);
  auto slot = [&](std::size_t k) {
    const int h = static_cast<int>(rng.below(static_cast<std::uint64_t>(H)));
    const int cell = cells[k][h][samplers[k][h].draw(rng)];
    const auto [s, a] = pairs[cell];
    return draw_transition(mdp, s, a, rng);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const int k = rng.categorical(mix.weights);
    const Transition first = slot(static_cast<std::size_t>(k));
    const Transition second = slot(static_cast<std::size_t>(k));
    data.pairs.emplace_back(first, second);
    data.policy_index.push_back(k);
  }
  return data;
}

DataDistribution occupancy_distribution(const LayeredMDP& mdp, const Policy& pi) {
  auto occ = occupancy(mdp, pi);
  const double H = mdp.horizon();
  for (double& x : occ.d) x /= H;
  return occ.d;
}

SATable exact_weight(const LayeredMDP& mdp, const Policy& pi, const DataDistribution& mu) {
  const auto occ = occupancy(mdp, pi);
  const double H = mdp.horizon();
  SATable w(occ.d.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (occ.d[i] == 0.0) continue;
    if (mu[i] <= 0.0) throw DomainError("exact_weight: mu lacks support where d^pi > 0");
    w[i] = occ.d[i] / (H * mu[i]);
  }
  return w;
}

std::vector<double> bellman_rank_features(const LayeredMDP& mdp, const Policy& pi) {
  const auto occ = occupancy(mdp, pi);
  const auto SA = static_cast<std::size_t>(mdp.num_state_actions());
  std::vector<double> x(SA + static_cast<std::size_t>(mdp.num_states()), 0.0);
  std::copy(occ.d.begin(), occ.d.end(), x.begin());
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(s); ++a) {
      const double d = occ.d[mdp.sa(s, a)];
      if (d == 0.0) continue;
      for (const auto& nx : mdp.next(s, a)) x[SA + nx.state] += d * nx.prob;
    }
  }
  return x;
}

std::vector<double> bellman_rank_weights(const LayeredMDP& mdp, const Regularizer& reg,
                                         const QFunction& f) {
  const auto v = state_values(mdp, reg, f);
  const auto SA = static_cast<std::size_t>(mdp.num_state_actions());
  std::vector<double> w(SA + v.size());
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(s); ++a) {
      w[mdp.sa(s, a)] = f[mdp.sa(s, a)] - mdp.reward(s, a);
    }
  }
  for (std::size_t s = 0; s < v.size(); ++s) w[SA + s] = -v[s];
  return w;
}

double policy_feature_coverage(const LayeredMDP& mdp, const PolicyMixture& mix,
                               const Policy& target) {
  const auto xt = bellman_rank_features(mdp, target);
  const auto dim = static_cast<Eigen::Index>(xt.size());
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t k = 0; k < mix.policies.size(); ++k) {
    const auto x = bellman_rank_features(mdp, mix.policies[k]);
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), dim);
    sigma.noalias() += mix.weights[k] * xv * xv.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  const auto& lambda = eig.eigenvalues();
  const auto& basis = eig.eigenvectors();
  const double lmax = lambda.maxCoeff();
  const Eigen::Map<const Eigen::VectorXd> target_x(xt.data(), dim);
  if (!(lmax > 0.0)) return target_x.norm() == 0.0 ? 0.0 : kUnbounded;
  const double cutoff = 1e-10 * lmax;
  double value = 0.0;
  Eigen::VectorXd projected = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (lambda(k) <= cutoff) continue;
    const double c = basis.col(k).dot(target_x);
    projected += c * basis.col(k);
    value += c * c / lambda(k);
  }
  const double outside = (target_x - projected).norm();
  if (outside > 1e-8 * std::max(1.0, target_x.norm())) return kUnbounded;
  return value;
}

std::vector<std::string> validate_distribution(const LayeredMDP& mdp, const DataDistribution& mu) {
  std::vector<std::string> findings;
  if (mu.size() != static_cast<std::size_t>(mdp.num_state_actions())) {
    findings.push_back("distribution: size " + std::to_string(mu.size()) +
                       " does not match the MDP's " + std::to_string(mdp.num_state_actions()) +
                       " state-action pairs");
    return findings;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] >= 0.0) || !std::isfinite(mu[i])) {
      findings.push_back("distribution: invalid mass at index " + std::to_string(i));
    }
    sum += mu[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    findings.push_back("distribution: masses sum to " + format_double(sum));
  }
  return findings;
}

std::vector<std::string> validate_mixture(const LayeredMDP& mdp, const PolicyMixture& mix) {
  std::vector<std::string> findings;
  if (mix.policies.empty()) findings.push_back("mixture: no policies");
  if (mix.policies.size() != mix.weights.size()) {
    findings.push_back("mixture: policy and weight counts differ");
  }
  double sum = 0.0;
  for (double w : mix.weights) {
    if (!(w >= 0.0)) findings.push_back("mixture: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) findings.push_back("mixture: weights sum to " + format_double(sum));
  for (const auto& pi : mix.policies) {
    for (auto& f : validate_policy(mdp, pi)) findings.push_back("mixture " + f);
  }
  return findings;
}

}  // namespace offrl
