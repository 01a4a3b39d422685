#include "offrl/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace offrl {

namespace {

std::vector<double> simplex_point(int k, Rng& rng, double floor = 0.0) {
  // Normalized exponentials give a uniform point on the simplex.
  std::vector<double> p(static_cast<std::size_t>(k));
  double total = 0.0;
  for (double& x : p) {
    x = -std::log(1.0 - rng.uniform()) + floor;
    total += x;
  }
  for (double& x : p) x /= total;
  return p;
}

void fill_random(LayeredMDP& mdp, const RandomMdpSpec& spec, Rng& rng) {
  const int H = mdp.horizon();
  std::vector<Successor> row;
  for (int h = 0; h < H; ++h) {
    for (int s : mdp.layer(h)) {
      for (int a = 0; a < mdp.num_actions(s); ++a) {
        if (spec.bernoulli_rewards) {
          mdp.set_reward(s, a, rng.uniform(), RewardNoise::Bernoulli);
        } else {
          mdp.set_reward(s, a, rng.uniform());
        }
        if (h == H - 1) continue;
        std::vector<int> next = mdp.layer(h + 1);
        const int width = static_cast<int>(next.size());
        const int cap = spec.max_support > 0 ? std::min(spec.max_support, width) : width;
        const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cap)));
        for (int i = 0; i < k; ++i) {
          const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(width - i)));
          std::swap(next[i], next[j]);
        }
        std::sort(next.begin(), next.begin() + k);
        const auto w = simplex_point(k, rng, 0.05);
        row.clear();
        for (int i = 0; i < k; ++i) row.push_back({next[i], w[i]});
        mdp.set_transition(s, a, row);
      }
    }
  }
}

}  // namespace

LayeredMDP random_mdp(const RandomMdpSpec& spec, Rng& rng) {
  if (spec.layer_sizes.empty()) throw DomainError("random_mdp: no layers");
  if (spec.min_actions < 1 || spec.max_actions < spec.min_actions) {
    throw DomainError("random_mdp: invalid action range");
  }
  std::vector<std::vector<int>> layers;
  int next_id = 0;
  for (std::size_t h = 0; h < spec.layer_sizes.size(); ++h) {
    const int size = h == 0 ? 1 : std::max(1, spec.layer_sizes[h]);
    std::vector<int> layer(static_cast<std::size_t>(size));
    std::iota(layer.begin(), layer.end(), next_id);
    next_id += size;
    layers.push_back(std::move(layer));
  }
  std::vector<int> actions(static_cast<std::size_t>(next_id));
  const auto spread = static_cast<std::uint64_t>(spec.max_actions - spec.min_actions + 1);
  for (int& k : actions) k = spec.min_actions + static_cast<int>(rng.below(spread));
  LayeredMDP mdp(std::move(layers), std::move(actions));
  fill_random(mdp, spec, rng);
  return mdp;
}

LayeredMDP perturb_rewards(const LayeredMDP& base, double fraction, Rng& rng) {
  LayeredMDP out = base;
  for (int s = 0; s < out.num_states(); ++s) {
    for (int a = 0; a < out.num_actions(s); ++a) {
      if (rng.uniform() < fraction) out.set_reward(s, a, rng.uniform(), base.noise(s, a));
    }
  }
  return out;
}

LayeredMDP redraw_model(const LayeredMDP& base, const RandomMdpSpec& spec, Rng& rng) {
  std::vector<int> actions(static_cast<std::size_t>(base.num_states()));
  for (int s = 0; s < base.num_states(); ++s) actions[s] = base.num_actions(s);
  LayeredMDP out(base.layers(), std::move(actions));
  out.set_extended_reward_range(base.extended_reward_range());
  fill_random(out, spec, rng);
  return out;
}

Policy random_policy(const LayeredMDP& mdp, Rng& rng) {
  Policy pi(static_cast<std::size_t>(mdp.num_state_actions()), 0.0);
  for (int s = 0; s < mdp.num_states(); ++s) {
    const auto p = simplex_point(mdp.num_actions(s), rng, 1e-3);
    std::copy(p.begin(), p.end(), mdp.row(pi, s).begin());
  }
  return pi;
}

Policy random_deterministic_policy(const LayeredMDP& mdp, Rng& rng) {
  std::vector<int> actions(static_cast<std::size_t>(mdp.num_states()));
  for (int s = 0; s < mdp.num_states(); ++s) {
    actions[s] = static_cast<int>(rng.below(static_cast<std::uint64_t>(mdp.num_actions(s))));
  }
  return deterministic_policy(mdp, actions);
}

QFunction random_function(const LayeredMDP& mdp, double lo, double hi, Rng& rng) {
  QFunction f(static_cast<std::size_t>(mdp.num_state_actions()));
  for (double& x : f) x = lo + (hi - lo) * rng.uniform();
  return f;
}

std::vector<std::vector<double>> random_reference(const LayeredMDP& mdp, Rng& rng) {
  std::vector<std::vector<double>> rows;
  for (int s = 0; s < mdp.num_states(); ++s) rows.push_back(simplex_point(mdp.num_actions(s), rng, 0.2));
  return rows;
}

DataDistribution random_distribution(const LayeredMDP& mdp, Rng& rng) {
  return simplex_point(mdp.num_state_actions(), rng, 0.1);
}

namespace {

BanditWorlds bandit(const std::vector<std::vector<double>>& tables) {
  BanditWorlds w;
  w.models.reg = Regularizer::none();
  const char* names[] = {"f_x", "f_y"};
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const int k = static_cast<int>(tables[i].size());
    LayeredMDP m({{0}}, {k});
    for (int a = 0; a < k; ++a) m.set_reward(0, a, tables[i][a]);
    w.models.add(std::move(m), std::string("M_") + (i == 0 ? "x" : "y"));
    w.fclass.add(tables[i], names[i]);
  }
  w.models.solve();
  return w;
}

}  // namespace

BanditWorlds robust_choice_bandit(double delta) {
  return bandit({{1.0, 0.0}, {0.5 - delta, 0.5 + delta}});
}

BanditWorlds hedging_bandit(double delta) {
  return bandit({{1.0, 0.0, 1.0 - delta}, {0.0, 1.0, 1.0 - delta}});
}

CqlInstance cql_canonical_instance(std::uint64_t seed, double alpha, int alternatives) {
  Rng rng(seed);
  RandomMdpSpec spec;
  spec.layer_sizes = {1, 2, 2};
  spec.min_actions = spec.max_actions = 3;
  spec.bernoulli_rewards = true;
  CqlInstance inst;
  inst.mdp = random_mdp(spec, rng);
  inst.reg = Regularizer::shannon(alpha);
  inst.optimal = solve_optimal(inst.mdp, inst.reg);
  inst.mu = occupancy_distribution(inst.mdp, inst.optimal.policy);
  inst.fclass.add(inst.optimal.q, "q_star");
  for (int k = 0; k < alternatives; ++k) {
    LayeredMDP alt = inst.mdp;
    for (int s = 0; s < alt.num_states(); ++s) {
      for (int a = 0; a < alt.num_actions(s); ++a) {
        if (rng.uniform() >= 0.3) continue;
        const double shift = rng.bernoulli(0.5) ? 0.25 : -0.25;
        alt.set_reward(s, a, std::clamp(alt.reward(s, a) + shift, 0.0, 1.0), alt.noise(s, a));
      }
    }
    inst.fclass.add(solve_optimal(alt, inst.reg).q, "alt_" + std::to_string(k));
  }
  for (std::size_t i = 0; i < inst.fclass.size(); ++i) {
    inst.gclass.add(bellman_apply(inst.mdp, inst.reg, inst.fclass.members[i]), "T_" + inst.fclass.names[i]);
  }
  for (std::size_t i = 0; i < inst.fclass.size(); ++i) inst.gclass.add(inst.fclass.members[i], inst.fclass.names[i]);
  return inst;
}

ConfidenceInstance confidence_canonical_instance(std::uint64_t seed) {
  Rng rng(seed);
  RandomMdpSpec spec;
  spec.layer_sizes = {1, 3, 3};
  spec.min_actions = spec.max_actions = 2;
  spec.bernoulli_rewards = true;
  ConfidenceInstance inst;
  inst.mdp = random_mdp(spec, rng);
  inst.reg = Regularizer::none();
  const auto opt = solve_optimal(inst.mdp, inst.reg);
  inst.fclass.add(opt.q, "q_star");
  for (int k = 0; k < 5; ++k) {
    inst.fclass.add(solve_optimal(perturb_rewards(inst.mdp, 0.5, rng), inst.reg).q, "alt_" + std::to_string(k));
  }
  for (std::size_t i = 0; i < inst.fclass.size(); ++i) {
    inst.gclass.add(bellman_apply(inst.mdp, inst.reg, inst.fclass.members[i]), "T_" + inst.fclass.names[i]);
  }
  for (std::size_t i = 0; i < inst.fclass.size(); ++i) inst.gclass.add(inst.fclass.members[i], inst.fclass.names[i]);
  inst.mu = random_distribution(inst.mdp, rng);

  inst.wclass.members.push_back(exact_weight(inst.mdp, opt.policy, inst.mu));
  inst.wclass.names.push_back("w_pi_star");
  for (int k = 0; k < 3; ++k) {
    inst.wclass.members.push_back(random_function(inst.mdp, 0.0, 2.0, rng));
    inst.wclass.names.push_back("w_" + std::to_string(k));
  }
  inst.wclass.b_w = 0.0;
  for (const auto& w : inst.wclass.members) inst.wclass.b_w = std::max(inst.wclass.b_w, *std::max_element(w.begin(), w.end()));

  inst.mixture.policies = {opt.policy, uniform_policy(inst.mdp), random_deterministic_policy(inst.mdp, rng)};
  inst.mixture.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  return inst;
}

DecisionInstance random_decision_instance(Rng& rng, const Regularizer& reg, int max_states, int max_actions,
                                          int max_models) {
  RandomMdpSpec spec;
  const int H = 1 + static_cast<int>(rng.below(3));
  spec.layer_sizes = {1};
  int used = 1;
  for (int h = 1; h < H; ++h) {
    const int room = max_states - used - (H - 1 - h);
    const int size = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::clamp(room, 1, 3))));
    spec.layer_sizes.push_back(size);
    used += size;
  }
  spec.min_actions = 2;
  spec.max_actions = std::max(2, max_actions);

  DecisionInstance inst;
  inst.universe.reg = reg;
  LayeredMDP truth = random_mdp(spec, rng);
  if (!reg.inactive() && reg.pi_ref.empty() && rng.bernoulli(0.5)) inst.universe.reg.pi_ref = random_reference(truth, rng);
  const int count = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, max_models - 1))));
  inst.universe.add(truth, "M0");
  for (int k = 1; k < count; ++k) {
    LayeredMDP alt = rng.bernoulli(0.5) ? perturb_rewards(truth, 0.5, rng) : redraw_model(truth, spec, rng);
    inst.universe.add(std::move(alt), "M" + std::to_string(k));
  }
  inst.universe.solve();
  for (std::size_t k = 0; k < inst.universe.size(); ++k) {
    inst.fclass.add(inst.universe.solved[k].q, "f" + std::to_string(k));
  }
  inst.conf.method = ConfMethod::BC;
  inst.conf.eps_stat = 0.0;
  inst.conf.losses.assign(inst.fclass.size(), 0.0);
  inst.conf.indices.push_back(0);
  for (std::size_t k = 1; k < inst.fclass.size(); ++k) {
    if (rng.bernoulli(0.7)) inst.conf.indices.push_back(static_cast<int>(k));
  }
  inst.mconf = induce_model_set(inst.universe, inst.conf, inst.fclass, 1e-9);
  inst.conf_functions = conf_members(inst.conf, inst.fclass);
  inst.policies = build_policy_set(inst.mconf, inst.conf_functions);
  return inst;
}

}  // namespace offrl
