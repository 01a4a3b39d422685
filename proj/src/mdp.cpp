#include "offrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace offrl {

namespace {

std::string loc(int s, int a) {
  return "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
}

}  // namespace

LayeredMDP::LayeredMDP(std::vector<std::vector<int>> layers, std::vector<int> num_actions)
    : layers_(std::move(layers)) {
  std::vector<std::string> findings;
  const std::size_t S = num_actions.size();
  layer_of_.assign(S, -1);
  if (layers_.empty()) findings.push_back("mdp: at least one layer is required");
  for (std::size_t h = 0; h < layers_.size(); ++h) {
    if (layers_[h].empty()) findings.push_back("mdp: layer " + std::to_string(h) + " is empty");
    for (int s : layers_[h]) {
      if (s < 0 || static_cast<std::size_t>(s) >= S) {
        findings.push_back("mdp: layer " + std::to_string(h) + " names unknown state " +
                           std::to_string(s));
      } else if (layer_of_[s] != -1) {
        findings.push_back("mdp: state " + std::to_string(s) + " appears in more than one layer");
      } else {
        layer_of_[s] = static_cast<int>(h);
      }
    }
  }
  for (std::size_t s = 0; s < S; ++s) {
    if (layer_of_[s] == -1) findings.push_back("mdp: state " + std::to_string(s) + " is in no layer");
    if (num_actions[s] < 1) findings.push_back("mdp: state " + std::to_string(s) + " has no actions");
  }
  if (!findings.empty()) throw ValidationError(std::move(findings));

  offset_.assign(S + 1, 0);
  for (std::size_t s = 0; s < S; ++s) offset_[s + 1] = offset_[s] + num_actions[s];
  const auto n = static_cast<std::size_t>(offset_.back());
  reward_.assign(n, 0.0);
  noise_.assign(n, RewardNoise::Deterministic);
  row_begin_.assign(n, 0);
  row_len_.assign(n, 0);
}

LayeredMDP LayeredMDP::uniform(std::vector<std::vector<int>> layers, int actions) {
  std::size_t S = 0;
  for (const auto& l : layers) S += l.size();
  return LayeredMDP(std::move(layers), std::vector<int>(S, actions));
}

int LayeredMDP::max_actions() const {
  int m = 0;
  for (int s = 0; s < num_states(); ++s) m = std::max(m, num_actions(s));
  return m;
}

void LayeredMDP::set_reward(int s, int a, double mean, RewardNoise noise) {
  const auto i = static_cast<std::size_t>(sa(s, a));
  reward_.at(i) = mean;
  noise_.at(i) = noise;
}

void LayeredMDP::set_transition(int s, int a, std::span<const Successor> next) {
  const auto i = static_cast<std::size_t>(sa(s, a));
  row_begin_.at(i) = static_cast<std::int64_t>(succ_.size());
  row_len_.at(i) = static_cast<int>(next.size());
  succ_.insert(succ_.end(), next.begin(), next.end());
}

std::span<const Successor> LayeredMDP::next(int s, int a) const {
  const auto i = static_cast<std::size_t>(sa(s, a));
  return {succ_.data() + row_begin_[i], static_cast<std::size_t>(row_len_[i])};
}

bool LayeredMDP::same_shape(const LayeredMDP& other) const {
  return layers_ == other.layers_ && offset_ == other.offset_;
}

std::vector<std::string> LayeredMDP::validate() const {
  std::vector<std::string> findings;
  if (layers_.empty()) {
    findings.push_back("mdp: no layers");
    return findings;
  }
  if (layers_.front().size() != 1) findings.push_back("mdp: first layer must be a single state");
  const int H = horizon();
  for (int s = 0; s < num_states(); ++s) {
    const int h = layer_of(s);
    for (int a = 0; a < num_actions(s); ++a) {
      const double r = reward(s, a);
      if (!std::isfinite(r)) {
        findings.push_back("reward " + loc(s, a) + " is not finite");
      } else if (noise(s, a) == RewardNoise::Bernoulli && (r < 0.0 || r > 1.0)) {
        findings.push_back("reward " + loc(s, a) + " Bernoulli mean outside [0, 1]");
      } else if (!extended_range_ && (r < 0.0 || r > 1.0)) {
        findings.push_back("reward " + loc(s, a) + " = " + format_double(r) +
                           " outside [0, 1] without extended_reward_range");
      }
      const auto row = next(s, a);
      if (h == H - 1) {
        if (!row.empty()) findings.push_back("transition " + loc(s, a) + " leaves the last layer");
        continue;
      }
      double sum = 0.0;
      bool ok = true;
      for (const auto& nx : row) {
        if (nx.state < 0 || nx.state >= num_states()) {
          findings.push_back("transition " + loc(s, a) + " targets unknown state " +
                             std::to_string(nx.state));
          ok = false;
          continue;
        }
        if (layer_of(nx.state) != h + 1) {
          findings.push_back("transition " + loc(s, a) + " targets state " +
                             std::to_string(nx.state) + " outside the next layer");
          ok = false;
        }
        if (!(nx.prob >= 0.0) || !std::isfinite(nx.prob)) {
          findings.push_back("transition " + loc(s, a) + " has an invalid probability");
          ok = false;
        }
        sum += nx.prob;
      }
      if (ok && std::abs(sum - 1.0) > 1e-12) {
        findings.push_back("transition " + loc(s, a) + " sums to " + format_double(sum));
      }
    }
  }
  return findings;
}

void LayeredMDP::check() const {
  auto findings = validate();
  if (!findings.empty()) throw ValidationError(std::move(findings));
}

namespace {

double expected_next(const LayeredMDP& mdp, const std::vector<double>& v, int s, int a) {
  double total = 0.0;
  for (const auto& nx : mdp.next(s, a)) total += nx.prob * v[static_cast<std::size_t>(nx.state)];
  return total;
}

}  // namespace

ValueSolution solve_optimal(const LayeredMDP& mdp, const Regularizer& reg) {
  ValueSolution sol;
  sol.q.assign(static_cast<std::size_t>(mdp.num_state_actions()), 0.0);
  sol.v.assign(static_cast<std::size_t>(mdp.num_states()), 0.0);
  sol.policy.assign(sol.q.size(), 0.0);
  for (int h = mdp.horizon() - 1; h >= 0; --h) {
    for (int s : mdp.layer(h)) {
      auto qrow = mdp.row(sol.q, s);
      for (int a = 0; a < mdp.num_actions(s); ++a) {
        qrow[a] = mdp.reward(s, a) + expected_next(mdp, sol.v, s, a);
      }
      try {
        const auto best = regularized_argmax(reg, qrow, s);
        std::copy(best.p.begin(), best.p.end(), mdp.row(sol.policy, s).begin());
        sol.v[s] = best.value;
      } catch (const SolverError& e) {
        std::ostringstream msg;
        msg << e.what() << " [solve_optimal: state " << s << ", layer " << h << "]";
        throw SolverError(msg.str());
      }
    }
  }
  sol.j = sol.v[static_cast<std::size_t>(mdp.initial_state())];
  return sol;
}

ValueSolution policy_evaluation(const LayeredMDP& mdp, const Regularizer& reg, const Policy& pi) {
  ValueSolution sol;
  sol.q.assign(static_cast<std::size_t>(mdp.num_state_actions()), 0.0);
  sol.v.assign(static_cast<std::size_t>(mdp.num_states()), 0.0);
  sol.policy = pi;
  for (int h = mdp.horizon() - 1; h >= 0; --h) {
    for (int s : mdp.layer(h)) {
      auto qrow = mdp.row(sol.q, s);
      const auto prow = mdp.row(pi, s);
      double v = 0.0;
      for (int a = 0; a < mdp.num_actions(s); ++a) {
        qrow[a] = mdp.reward(s, a) + expected_next(mdp, sol.v, s, a);
        v += prow[a] * qrow[a];
      }
      if (mdp.num_actions(s) > 1) v -= psi_value(reg, prow, s);
      sol.v[s] = v;
    }
  }
  sol.j = sol.v[static_cast<std::size_t>(mdp.initial_state())];
  return sol;
}

OccupancyMeasure occupancy(const LayeredMDP& mdp, const Policy& pi) {
  OccupancyMeasure occ;
  occ.d.assign(static_cast<std::size_t>(mdp.num_state_actions()), 0.0);
  occ.d_state.assign(static_cast<std::size_t>(mdp.num_states()), 0.0);
  occ.d_state[static_cast<std::size_t>(mdp.initial_state())] = 1.0;
  for (int h = 0; h < mdp.horizon(); ++h) {
    for (int s : mdp.layer(h)) {
      const double ds = occ.d_state[s];
      if (ds == 0.0) continue;
      for (int a = 0; a < mdp.num_actions(s); ++a) {
        const double dsa = ds * pi[mdp.sa(s, a)];
        occ.d[mdp.sa(s, a)] = dsa;
        if (dsa == 0.0) continue;
        for (const auto& nx : mdp.next(s, a)) occ.d_state[nx.state] += dsa * nx.prob;
      }
    }
  }
  return occ;
}

double coverage_coefficient(const LayeredMDP& mdp, const Policy& pi, const DataDistribution& mu) {
  const auto occ = occupancy(mdp, pi);
  const double H = mdp.horizon();
  double worst = 0.0;
  for (std::size_t i = 0; i < occ.d.size(); ++i) {
    if (occ.d[i] == 0.0) continue;
    if (mu[i] <= 0.0) return kUnbounded;
    worst = std::max(worst, occ.d[i] / (H * mu[i]));
  }
  return worst;
}

double state_value(const LayeredMDP& mdp, const Regularizer& reg, const QFunction& f, int s) {
  return regularized_value(reg, mdp.row(f, s), s);
}

std::vector<double> state_values(const LayeredMDP& mdp, const Regularizer& reg, const QFunction& f) {
  std::vector<double> v(static_cast<std::size_t>(mdp.num_states()));
  for (int s = 0; s < mdp.num_states(); ++s) v[s] = state_value(mdp, reg, f, s);
  return v;
}

QFunction bellman_apply(const LayeredMDP& mdp, const Regularizer& reg, const QFunction& f) {
  const auto v = state_values(mdp, reg, f);
  QFunction out(f.size(), 0.0);
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(s); ++a) {
      out[mdp.sa(s, a)] = mdp.reward(s, a) + expected_next(mdp, v, s, a);
    }
  }
  return out;
}

Policy greedy_policy(const LayeredMDP& mdp, const Regularizer& reg, const QFunction& f) {
  Policy pi(f.size(), 0.0);
  for (int s = 0; s < mdp.num_states(); ++s) {
    const auto best = regularized_argmax(reg, mdp.row(f, s), s);
    std::copy(best.p.begin(), best.p.end(), mdp.row(pi, s).begin());
  }
  return pi;
}

Policy uniform_policy(const LayeredMDP& mdp) {
  Policy pi(static_cast<std::size_t>(mdp.num_state_actions()), 0.0);
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (double& x : mdp.row(pi, s)) x = 1.0 / mdp.num_actions(s);
  }
  return pi;
}

Policy deterministic_policy(const LayeredMDP& mdp, const std::vector<int>& actions) {
  Policy pi(static_cast<std::size_t>(mdp.num_state_actions()), 0.0);
  for (int s = 0; s < mdp.num_states(); ++s) {
    const int a = mdp.num_actions(s) == 1 ? 0 : actions.at(static_cast<std::size_t>(s));
    pi[mdp.sa(s, a)] = 1.0;
  }
  return pi;
}

std::vector<std::string> validate_policy(const LayeredMDP& mdp, const Policy& pi) {
  std::vector<std::string> findings;
  if (pi.size() != static_cast<std::size_t>(mdp.num_state_actions())) {
    findings.push_back("policy: table size does not match the MDP");
    return findings;
  }
  for (int s = 0; s < mdp.num_states(); ++s) {
    double sum = 0.0;
    for (double x : mdp.row(pi, s)) {
      if (!(x >= 0.0)) findings.push_back("policy: negative entry at state " + std::to_string(s));
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      findings.push_back("policy: row " + std::to_string(s) + " sums to " + format_double(sum));
    }
  }
  return findings;
}

double bellman_residual(const LayeredMDP& mdp, const Regularizer& reg, const ValueSolution& sol) {
  double worst = 0.0;
  for (int s = 0; s < mdp.num_states(); ++s) {
    const auto prow = mdp.row(sol.policy, s);
    const auto qrow = mdp.row(sol.q, s);
    double v = 0.0;
    for (int a = 0; a < mdp.num_actions(s); ++a) {
      const double target = mdp.reward(s, a) + expected_next(mdp, sol.v, s, a);
      worst = std::max(worst, std::abs(qrow[a] - target));
      v += prow[a] * qrow[a];
    }
    if (mdp.num_actions(s) > 1) v -= psi_value(reg, prow, s);
    worst = std::max(worst, std::abs(sol.v[s] - v));
  }
  return worst;
}

double sup_distance(const SATable& a, const SATable& b) {
  if (a.size() != b.size()) return kUnbounded;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace offrl
