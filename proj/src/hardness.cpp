#include "offrl/hardness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

namespace offrl {

namespace {

bool top_is_u(HardFamily f) { return f == HardFamily::UX || f == HardFamily::UY; }
bool terminal_is_x(HardFamily f) { return f == HardFamily::UX || f == HardFamily::VX; }

// Terminal tables indexed [state A/B][action x/y/z].
constexpr double kF3[2][3] = {{1.0, -2.0, 0.0}, {0.0, -2.0, 1.0}};
constexpr double kG3[2][3] = {{-2.0, 1.0, 0.0}, {-2.0, 0.0, 1.0}};

// Members (f1|g1, f2, f3|g3) on a base layout.
QFunction hard_function(const HardInstance& inst, bool first_is_f1, bool last_is_f3) {
  const LayeredMDP& mdp = inst.mdp;
  QFunction f(static_cast<std::size_t>(mdp.num_state_actions()), 0.0);
  const double d = inst.delta;
  f[mdp.sa(inst.s1, kActU)] = first_is_f1 ? 1.5 : 1.5 + d;
  f[mdp.sa(inst.s1, kActV)] = first_is_f1 ? 1.5 + d : 1.5;
  for (int i = 0; i < 2 * inst.m; ++i) f[mdp.sa(inst.w_begin + i, 0)] = 1.0;
  const auto& table = last_is_f3 ? kF3 : kG3;
  for (int a = 0; a < 3; ++a) {
    f[mdp.sa(inst.s_a, a)] = table[0][a];
    f[mdp.sa(inst.s_b, a)] = table[1][a];
  }
  return f;
}

void require_parameters(int m, double delta) {
  std::vector<std::string> findings;
  if (m < 1) findings.push_back("hardness: m must be at least 1");
  if (!(delta >= 0.0 && delta <= 0.25)) findings.push_back("hardness: delta must lie in [0, 1/4]");
  if (!findings.empty()) throw ValidationError(findings);
}

}  // namespace

std::string to_string(HardFamily f) {
  switch (f) {
    case HardFamily::UX:
      return "ux";
    case HardFamily::UY:
      return "uy";
    case HardFamily::VX:
      return "vx";
    case HardFamily::VY:
      return "vy";
  }
  return "ux";
}

HardFamily hard_family_from_string(const std::string& name) {
  for (HardFamily f : kAllFamilies) {
    if (to_string(f) == name) return f;
  }
  throw DomainError("unknown hardness family '" + name + "'");
}

int HardInstance::lower_action() const { return top_is_u(family) ? kActV : kActU; }

Policy HardInstance::make_policy(int a1, int a_sa, int a_sb) const {
  std::vector<int> actions(static_cast<std::size_t>(mdp.num_states()), 0);
  actions[s1] = a1;
  actions[s_a] = a_sa;
  actions[s_b] = a_sb;
  return deterministic_policy(mdp, actions);
}

Policy HardInstance::lowest_branch_policy() const { return make_policy(lower_action(), kActZ, kActZ); }

Policy HardInstance::behavior_policy() const {
  Policy pi = make_policy(kActU, kActZ, kActZ);
  pi[mdp.sa(s1, kActU)] = 0.5;
  pi[mdp.sa(s1, kActV)] = 0.5;
  return pi;
}

double HardInstance::expected_optimal_value() const { return p * (1.5 + delta); }

bool HardnessCertificate::ok(double tol) const {
  return structure_valid && realizable && bellman_complete && coverage <= 2.0 + tol && policy_gap <= tol;
}

std::vector<char> sample_assignment(int m, std::uint64_t seed) {
  std::vector<char> in_a = canonical_assignment(m);
  Rng rng(seed);
  for (std::size_t i = in_a.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(in_a[i], in_a[j]);
  }
  return in_a;
}

std::vector<char> canonical_assignment(int m) {
  std::vector<char> in_a(static_cast<std::size_t>(2 * m), 0);
  std::fill(in_a.begin(), in_a.begin() + m, 1);
  return in_a;
}

HardInstance build_hard_instance(HardFamily family, int m, double delta, std::uint64_t seed) {
  require_parameters(m, delta);
  auto inst = build_hard_instance(family, m, delta, sample_assignment(m, seed));
  inst.seed = seed;
  return inst;
}

HardInstance build_hard_instance(HardFamily family, int m, double delta, std::vector<char> in_a) {
  require_parameters(m, delta);
  if (in_a.size() != static_cast<std::size_t>(2 * m) ||
      std::count(in_a.begin(), in_a.end(), 1) != m) {
    throw ValidationError({"hardness: assignment must place exactly m of the 2m states in W_A"});
  }
  HardInstance inst;
  inst.family = family;
  inst.m = m;
  inst.delta = delta;
  inst.in_a = std::move(in_a);
  inst.s1 = 0;
  inst.w_begin = 1;
  inst.s_a = 2 * m + 1;
  inst.s_b = 2 * m + 2;

  std::vector<std::vector<int>> layers(3);
  layers[0] = {inst.s1};
  layers[1].resize(static_cast<std::size_t>(2 * m));
  std::iota(layers[1].begin(), layers[1].end(), inst.w_begin);
  layers[2] = {inst.s_a, inst.s_b};
  std::vector<int> actions(static_cast<std::size_t>(2 * m + 3), 1);
  actions[inst.s1] = 2;
  actions[inst.s_a] = 3;
  actions[inst.s_b] = 3;
  inst.mdp = LayeredMDP(std::move(layers), std::move(actions));
  LayeredMDP& mdp = inst.mdp;
  mdp.set_extended_reward_range(true);

  for (int i = 0; i < 2 * m; ++i) {
    (inst.in_a[i] ? inst.w_a : inst.w_b).push_back(inst.w_begin + i);
  }
  const bool u_top = top_is_u(family);
  const int top = u_top ? kActU : kActV;
  const int low = u_top ? kActV : kActU;
  mdp.set_reward(inst.s1, top, 0.5, RewardNoise::Bernoulli);
  mdp.set_reward(inst.s1, low, 0.5 + delta, RewardNoise::Bernoulli);
  std::vector<Successor> row;
  row.reserve(static_cast<std::size_t>(m));
  for (int w : inst.w_a) row.push_back({w, 1.0 / m});
  mdp.set_transition(inst.s1, top, row);
  row.clear();
  for (int w : inst.w_b) row.push_back({w, 1.0 / m});
  mdp.set_transition(inst.s1, low, row);
  for (int i = 0; i < 2 * m; ++i) {
    const int w = inst.w_begin + i;
    mdp.set_reward(w, 0, 0.0);
    mdp.set_transition(w, 0, {{inst.in_a[i] ? inst.s_a : inst.s_b, 1.0}});
  }
  const auto& table = terminal_is_x(family) ? kF3 : kG3;
  for (int a = 0; a < 3; ++a) {
    mdp.set_reward(inst.s_a, a, table[0][a]);
    mdp.set_reward(inst.s_b, a, table[1][a]);
  }

  inst.fclass.add(hard_function(inst, true, true), "f1f2f3");
  inst.fclass.add(hard_function(inst, true, false), "f1f2g3");
  inst.fclass.add(hard_function(inst, false, true), "g1f2f3");
  inst.fclass.add(hard_function(inst, false, false), "g1f2g3");
  inst.truth_index = (u_top ? 0 : 2) + (terminal_is_x(family) ? 0 : 1);
  inst.mu = occupancy_distribution(mdp, inst.behavior_policy());
  return inst;
}

HardnessCertificate certify(const HardInstance& inst) {
  HardnessCertificate cert;
  const Regularizer none = Regularizer::none();
  cert.structure_valid = inst.mdp.validate().empty();
  const auto sol = solve_optimal(inst.mdp, none);
  cert.optimal_value = sol.j;
  for (const auto& f : inst.fclass.members) {
    if (sup_distance(sol.q, f) <= 1e-9) cert.realizable = true;
  }
  cert.bellman_complete = verify_completeness(inst.mdp, none, inst.fclass, inst.fclass, 1e-9);
  const Policy pi = inst.lowest_branch_policy();
  cert.coverage = coverage_coefficient(inst.mdp, pi, inst.mu);
  cert.policy_gap = std::abs(policy_values(inst.mdp, none, {pi}).front() - sol.j);
  return cert;
}

HardInstance build_eps_extension(const HardInstance& inst, double eps) {
  if (!(eps > 0.0 && eps <= 0.25)) throw ValidationError({"hardness: eps must lie in (0, 1/4]"});
  if (inst.s0 >= 0) throw DomainError("build_eps_extension: instance is already extended");
  const LayeredMDP& base = inst.mdp;
  const int n_base = base.num_states();
  HardInstance ext = inst;
  ext.eps = eps;
  ext.p = 4.0 * eps;
  ext.s0 = 0;
  ext.s1 = inst.s1 + 1;
  ext.w_begin = inst.w_begin + 1;
  ext.s_a = inst.s_a + 1;
  ext.s_b = inst.s_b + 1;
  ext.chain = {n_base + 1, n_base + 2, n_base + 3};
  for (int& w : ext.w_a) ++w;
  for (int& w : ext.w_b) ++w;

  std::vector<std::vector<int>> layers(static_cast<std::size_t>(base.horizon() + 1));
  layers[0] = {0};
  for (int h = 0; h < base.horizon(); ++h) {
    for (int s : base.layer(h)) layers[h + 1].push_back(s + 1);
    layers[h + 1].push_back(ext.chain[h]);
  }
  std::vector<int> actions(static_cast<std::size_t>(n_base + 4), 1);
  for (int s = 0; s < n_base; ++s) actions[s + 1] = base.num_actions(s);
  ext.mdp = LayeredMDP(std::move(layers), std::move(actions));
  LayeredMDP& mdp = ext.mdp;
  mdp.set_extended_reward_range(true);
  mdp.set_reward(0, 0, 0.0);
  if (ext.p < 1.0) {
    mdp.set_transition(0, 0, {{ext.s1, ext.p}, {ext.chain[0], 1.0 - ext.p}});
  } else {
    mdp.set_transition(0, 0, {{ext.s1, 1.0}});
  }
  std::vector<Successor> row;
  for (int s = 0; s < n_base; ++s) {
    for (int a = 0; a < base.num_actions(s); ++a) {
      mdp.set_reward(s + 1, a, base.reward(s, a), base.noise(s, a));
      row.clear();
      for (const auto& nx : base.next(s, a)) row.push_back({nx.state + 1, nx.prob});
      mdp.set_transition(s + 1, a, row);
    }
  }
  for (int k = 0; k < 3; ++k) {
    mdp.set_reward(ext.chain[k], 0, 0.0);
    if (k < 2) mdp.set_transition(ext.chain[k], 0, {{ext.chain[k + 1], 1.0}});
  }

  ext.fclass = FunctionClass{};
  for (std::size_t i = 0; i < inst.fclass.size(); ++i) {
    const QFunction& f = inst.fclass.members[i];
    QFunction g(static_cast<std::size_t>(mdp.num_state_actions()), 0.0);
    for (int s = 0; s < n_base; ++s) {
      for (int a = 0; a < base.num_actions(s); ++a) g[mdp.sa(s + 1, a)] = f[base.sa(s, a)];
    }
    const auto first = base.row(f, inst.s1);
    g[mdp.sa(0, 0)] = ext.p * *std::max_element(first.begin(), first.end());
    ext.fclass.add(std::move(g), inst.fclass.names[i]);
  }
  ext.mu = occupancy_distribution(mdp, ext.behavior_policy());
  return ext;
}

OfflineDataset sample_hard_dataset(const HardInstance& inst, std::size_t n, std::uint64_t seed) {
  if (inst.s0 >= 0) throw DomainError("sample_hard_dataset: use sample_dataset on extended instances");
  OfflineDataset data;
  data.seed = seed;
  data.mu_tag = "hard-instance-layers";
  Rng rng(seed);
  const LayeredMDP& mdp = inst.mdp;
  data.tuples.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const int a = static_cast<int>(rng.below(2));
    data.tuples.push_back(draw_transition(mdp, inst.s1, a, rng));
  }
  const auto width = static_cast<std::uint64_t>(2 * inst.m);
  for (std::size_t i = 0; i < n; ++i) {
    const int w = inst.w_begin + static_cast<int>(rng.below(width));
    data.tuples.push_back(draw_transition(mdp, w, 0, rng));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int s = rng.below(2) == 0 ? inst.s_a : inst.s_b;
    data.tuples.push_back(draw_transition(mdp, s, kActZ, rng));
  }
  return data;
}

Policy lift_policy(const HardInstance& from, const Policy& pi, const HardInstance& to) {
  Policy out = to.make_policy(kActU, kActZ, kActZ);
  auto copy_row = [&](int s_from, int s_to) {
    const auto src = from.mdp.row(pi, s_from);
    std::copy(src.begin(), src.end(), to.mdp.row(out, s_to).begin());
  };
  copy_row(from.s1, to.s1);
  copy_row(from.s_a, to.s_a);
  copy_row(from.s_b, to.s_b);
  return out;
}

const std::vector<std::string>& hardness_algorithms() {
  static const std::vector<std::string> names{"bc-gde", "bc-e2dor-offset", "bc-e2dor-ratio",
                                              "prior-uniform"};
  return names;
}

std::vector<std::string> HardnessConfig::validate() const {
  std::vector<std::string> findings;
  if (m < 1) findings.push_back("hardness: m must be at least 1");
  if (!(delta >= 0.0 && delta <= 0.25)) findings.push_back("hardness: delta must lie in [0, 1/4]");
  if (n_grid.empty()) findings.push_back("hardness: empty n grid");
  if (seeds < 1) findings.push_back("hardness: seeds must be positive");
  if (!(conf_delta > 0.0 && conf_delta < 1.0)) findings.push_back("hardness: conf_delta must lie in (0, 1)");
  if (jobs < 1) findings.push_back("hardness: jobs must be positive");
  if (algorithms.empty()) findings.push_back("hardness: no algorithms");
  const auto& known = hardness_algorithms();
  for (const auto& a : algorithms) {
    if (std::find(known.begin(), known.end(), a) == known.end()) {
      findings.push_back("hardness: unknown algorithm '" + a + "'");
    }
  }
  return findings;
}

std::vector<HardnessRun> hardness_run(const HardnessConfig& config, std::size_t n, int seed) {
  const Regularizer none = Regularizer::none();
  Rng rng(derive_seed(derive_seed(config.base_seed, n), static_cast<std::uint64_t>(seed)));
  const HardFamily family = kAllFamilies[rng.below(4)];
  const std::uint64_t phi_seed = rng.engine()();
  const std::uint64_t data_seed = rng.engine()();
  const HardInstance inst = build_hard_instance(family, config.m, config.delta, phi_seed);
  const double best = solve_optimal(inst.mdp, none).j;

  ConfidenceSet conf;
  if (n == 0) {
    conf = full_confidence_set(inst.fclass);
  } else {
    const auto data = sample_hard_dataset(inst, n, data_seed);
    conf = build_conf_bc(inst.mdp, data, inst.fclass, inst.fclass, none, config.conf_delta);
  }
  const std::string where = "hardness run (n=" + std::to_string(n) + ", seed=" + std::to_string(seed) + ")";

  // J and D depend on neither the assignment nor m, so the candidate
  // universe is represented by one m = 1 instance per family.
  std::vector<HardInstance> proxies;
  CandidateModelSet cands;
  cands.reg = none;
  for (HardFamily f : kAllFamilies) {
    proxies.push_back(build_hard_instance(f, 1, config.delta, canonical_assignment(1)));
    cands.add(proxies.back().mdp, to_string(f));
  }
  cands.solve();
  const HardInstance& proxy = proxies.front();

  auto value_of = [&](const MixturePolicy& rho) {
    double got = 0.0;
    for (std::size_t i = 0; i < rho.support.size(); ++i) {
      got += rho.weights[i] * policy_values(inst.mdp, none, {lift_policy(proxy, rho.support[i], inst)}).front();
    }
    return got;
  };

  std::vector<HardnessRun> rows;
  for (const auto& algo : config.algorithms) {
    HardnessRun run;
    run.algorithm = algo;
    run.n = n;
    run.m = config.m;
    run.delta = config.delta;
    run.seed = seed;
    run.family = family;
    try {
      if (algo == "bc-gde") {
        const auto g = gde_select(inst.mdp, conf, inst.fclass, none);
        run.suboptimality = best - policy_values(inst.mdp, none, {g.pi}).front();
      } else if (algo == "bc-e2dor-offset" || algo == "bc-e2dor-ratio") {
        const auto mconf = induce_model_set(cands, conf, proxy.fclass, 1e-9);
        const auto fs = conf_members(conf, proxy.fclass);
        const auto ps = build_policy_set(mconf, fs);
        const double gamma = config.gamma < 0.0 ? std::sqrt(static_cast<double>(n)) : config.gamma;
        const auto res = algo == "bc-e2dor-offset" ? e2dor_offset(mconf, fs, ps.policies, gamma)
                                                   : e2dor_ratio(mconf, fs, ps.policies);
        run.suboptimality = best - value_of(res.rho);
      } else if (algo == "prior-uniform") {
        run.suboptimality = best - policy_values(inst.mdp, none, {inst.behavior_policy()}).front();
      } else {
        throw DomainError("unknown algorithm '" + algo + "'");
      }
    } catch (const std::exception& e) {
      throw SolverError(where + ", " + algo + ": " + e.what());
    }
    rows.push_back(std::move(run));
  }
  return rows;
}

std::vector<HardnessRun> hardness_experiment(const HardnessConfig& config) {
  const auto findings = config.validate();
  if (!findings.empty()) throw ValidationError(findings);
  struct Task {
    std::size_t n;
    int seed;
  };
  std::vector<Task> tasks;
  for (std::size_t n : config.n_grid) {
    for (int s = 0; s < config.seeds; ++s) tasks.push_back({n, s});
  }
  std::vector<std::vector<HardnessRun>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = hardness_run(config, tasks[i].n, tasks[i].seed);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) first_error = e.what();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(tasks.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!first_error.empty()) throw SolverError(first_error);
  std::vector<HardnessRun> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::vector<HardnessSummary> summarize(const std::vector<HardnessRun>& runs) {
  std::vector<HardnessSummary> out;
  std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
  std::vector<std::pair<std::string, std::size_t>> order;
  for (const auto& r : runs) {
    const auto key = std::make_pair(r.algorithm, r.n);
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(r.suboptimality);
  }
  for (const auto& key : order) {
    const auto& xs = groups[key];
    HardnessSummary s;
    s.algorithm = key.first;
    s.n = key.second;
    s.count = static_cast<int>(xs.size());
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / s.count;
    if (s.count > 1) {
      double ss = 0.0;
      for (double x : xs) ss += (x - s.mean) * (x - s.mean);
      s.std_error = std::sqrt(ss / (s.count - 1) / s.count);
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace offrl
