#include "offrl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "offrl/experiments.hpp"
#include "offrl/game.hpp"
#include "offrl/hardness.hpp"
#include "offrl/instances.hpp"
#include "offrl/suites.hpp"

#ifndef OFFRL_VERSION
#define OFFRL_VERSION "0.0.0"
#endif

namespace offrl {

namespace fs = std::filesystem;

std::string offrl_version() { return OFFRL_VERSION; }

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"robust-choice",     "hedging",          "hardness", "cql-sweep",
                                              "regularizer-suite", "inequality-suite", "custom"};
  return names;
}

namespace {

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ", ") + x;
  return out;
}

/// Typed access to config fields. Type and range problems become findings
/// and the default is returned, so one pass reports everything.
class Reader {
 public:
  Reader(const Json& doc, std::vector<std::string>& findings) : doc_(doc), findings_(findings) {}

  bool has(const std::string& key) {
    seen_.insert(key);
    return doc_.contains(key);
  }

  void bad(const std::string& key, const std::string& what) { findings_.push_back("'" + key + "' " + what); }
  void add(std::vector<std::string> more) { findings_.insert(findings_.end(), more.begin(), more.end()); }
  std::vector<std::string>& findings() { return findings_; }

  const Json* raw(const std::string& key) { return has(key) ? &doc_.at(key) : nullptr; }

  double number(const std::string& key, double def, double lo, double hi, bool open_lo = false) {
    if (!has(key)) return def;
    const Json& v = doc_.at(key);
    if (!v.is_number()) {
      bad(key, "must be a number");
      return def;
    }
    const double x = v.get<double>();
    if (!in_range(x, lo, hi, open_lo)) {
      bad(key, range_text(lo, hi, open_lo));
      return def;
    }
    return x;
  }

  long long integer(const std::string& key, long long def, long long lo, long long hi) {
    if (!has(key)) return def;
    const Json& v = doc_.at(key);
    if (!v.is_number_integer()) {
      bad(key, "must be an integer");
      return def;
    }
    const long long x = v.get<long long>();
    if (x < lo || x > hi) {
      bad(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return def;
    }
    return x;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def, double lo, double hi,
                              bool open_lo = false) {
    if (!has(key)) return def;
    const Json& v = doc_.at(key);
    if (!v.is_array() || v.empty()) {
      bad(key, "must be a non-empty array of numbers");
      return def;
    }
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !in_range(e.get<double>(), lo, hi, open_lo)) {
        bad(key, "entries must be numbers that " + range_text(lo, hi, open_lo));
        return def;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> def, std::size_t lo,
                                  std::size_t hi) {
    if (!has(key)) return def;
    const Json& v = doc_.at(key);
    if (!v.is_array() || v.empty()) {
      bad(key, "must be a non-empty array of integers");
      return def;
    }
    std::vector<std::size_t> out;
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<long long>() < 0 || e.get<std::size_t>() < lo ||
          e.get<std::size_t>() > hi) {
        bad(key, "entries must be integers in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return def;
      }
      out.push_back(e.get<std::size_t>());
    }
    return out;
  }

  std::string text(const std::string& key, std::string def, const std::vector<std::string>& allowed = {}) {
    if (!has(key)) return def;
    const Json& v = doc_.at(key);
    if (!v.is_string()) {
      bad(key, "must be a string");
      return def;
    }
    auto s = v.get<std::string>();
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      bad(key, "'" + s + "' must be one of: " + join(allowed));
      return def;
    }
    return s;
  }

  std::vector<std::string> texts(const std::string& key, std::vector<std::string> def,
                                 const std::vector<std::string>& allowed = {}) {
    if (!has(key)) return def;
    const Json& v = doc_.at(key);
    if (!v.is_array() || v.empty()) {
      bad(key, "must be a non-empty array of strings");
      return def;
    }
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) {
        bad(key, "entries must be strings");
        return def;
      }
      const auto s = e.get<std::string>();
      if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
        bad(key, "entry '" + s + "' must be one of: " + join(allowed));
        return def;
      }
      out.push_back(s);
    }
    return out;
  }

  void finish() {
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (!seen_.count(it.key())) findings_.push_back("unknown key '" + it.key() + "'");
    }
  }

 private:
  static bool in_range(double x, double lo, double hi, bool open_lo) {
    return std::isfinite(x) && (open_lo ? x > lo : x >= lo) && x <= hi;
  }
  static std::string range_text(double lo, double hi, bool open_lo) {
    return std::string("must lie in ") + (open_lo ? "(" : "[") + format_double(lo) + ", " + format_double(hi) + "]";
  }

  const Json& doc_;
  std::vector<std::string>& findings_;
  std::set<std::string> seen_;
};

struct Context {
  std::uint64_t seed = 1;
  int jobs = 1;
  fs::path base_dir;
};

using Runner = std::function<ScenarioResult()>;

std::string num(double x) { return format_double(x); }

int top_action(const LayeredMDP& mdp, const Policy& pi, int s) {
  const auto row = mdp.row(pi, s);
  return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

std::string bandit_action(int a) {
  static const char* names[] = {"x", "y", "z"};
  return names[a];
}

double regret(const LayeredMDP& world, const Regularizer& reg, const ValueSolution& best, const Policy& pi) {
  return best.j - policy_evaluation(world, reg, pi).j;
}

Json stats_json(const MeanStderr& s) {
  return {{"count", s.count}, {"mean", json_number(s.mean)}, {"stderr", json_number(s.std_error)}};
}

Runner prepare_robust_choice(Reader& r, const Context&) {
  const double delta = r.number("delta", 0.01, 0.0, 0.25, true);
  const auto gammas = r.numbers("gamma", {0.005}, 0.0, 1e6, true);
  return [=] {
    const BanditWorlds w = robust_choice_bandit(delta);
    const auto& models = w.models;
    const ConfidenceSet conf = full_confidence_set(w.fclass);
    const auto fs = conf_members(conf, w.fclass);
    const PolicySet ps = build_policy_set(models, fs);
    const GdeResult gde = gde_select(models.shape(), conf, w.fclass, models.reg);
    const LayeredMDP& shape = models.shape();

    CsvTable csv({"algorithm", "gamma", "action", "weight", "world", "suboptimality"});
    auto world_regret = [&](std::size_t k, const Policy& pi) {
      return regret(models.models[k], models.reg, models.solved[k], pi);
    };
    const int gde_action = top_action(shape, gde.pi, 0);
    for (std::size_t k = 0; k < models.size(); ++k) {
      csv.add({"gde", "", bandit_action(gde_action), "1", models.names[k], num(world_regret(k, gde.pi))});
    }
    Json robust = Json::array();
    Policy first_robust;
    for (double gamma : gammas) {
      const auto res = e2dor_offset(models, fs, ps.policies, gamma);
      const int h = res.rho.heaviest();
      const Policy& pi = res.rho.support[h];
      if (first_robust.empty()) first_robust = pi;
      const int action = top_action(shape, pi, 0);
      Json regrets = Json::object();
      for (std::size_t k = 0; k < models.size(); ++k) {
        const double reg_k = world_regret(k, pi);
        regrets[models.names[k]] = reg_k;
        csv.add({"e2dor-offset", num(gamma), bandit_action(action), num(res.rho.weights[h]), models.names[k],
                 num(reg_k)});
      }
      robust.push_back({{"gamma", gamma},
                        {"action", bandit_action(action)},
                        {"weight", res.rho.weights[h]},
                        {"value", json_number(res.value)},
                        {"suboptimality", regrets}});
    }
    ScenarioResult out;
    out.scenario = "robust-choice";
    out.summary = {{"delta", delta},
                   {"gde_action", bandit_action(gde_action)},
                   {"gde_member", w.fclass.names[gde.index]},
                   {"robust_action", bandit_action(top_action(shape, first_robust, 0))},
                   {"subopt_fx_world", {{"gde", world_regret(0, gde.pi)}, {"robust", world_regret(0, first_robust)}}},
                   {"subopt_fy_world", {{"gde", world_regret(1, gde.pi)}, {"robust", world_regret(1, first_robust)}}},
                   {"robust", robust},
                   {"policy_set", ps.description}};
    out.files.emplace_back("results.csv", csv.str());
    return out;
  };
}

Runner prepare_hedging(Reader& r, const Context&) {
  const double delta = r.number("delta", 0.01, 0.0, 0.5, true);
  const bool has_gamma = r.has("gamma");
  auto gammas = r.numbers("gamma", {}, 0.0, 1e6, true);
  return [=] {
    const std::vector<double> grid = has_gamma ? gammas : std::vector<double>{delta / 4, delta / 2};
    const BanditWorlds w = hedging_bandit(delta);
    const auto& models = w.models;
    const ConfidenceSet conf = full_confidence_set(w.fclass);
    const auto fs = conf_members(conf, w.fclass);
    const PolicySet ps = build_policy_set(models, fs);
    const LayeredMDP& shape = models.shape();
    const GdeResult gde = gde_select(shape, conf, w.fclass, models.reg);
    const double gdec = compute_gdec(models, gde.f);
    const auto ratio = e2dor_ratio(models, fs, ps.policies);
    auto z_mass = [&](const MixturePolicy& rho) {
      double mass = 0.0;
      for (std::size_t i = 0; i < rho.support.size(); ++i) mass += rho.weights[i] * rho.support[i][shape.sa(0, kBanditZ)];
      return mass;
    };

    CsvTable csv({"quantity", "gamma", "value"});
    csv.add({"gdec", "", num(gdec)});
    csv.add({"ordec_ratio", "", num(ratio.value)});
    csv.add({"ratio_z_mass", "", num(z_mass(ratio.rho))});
    Json offsets = Json::array();
    for (double gamma : grid) {
      const auto off = e2dor_offset(models, fs, ps.policies, gamma);
      const double mass = z_mass(off.rho);
      csv.add({"ordec_offset", num(gamma), num(off.value)});
      csv.add({"offset_z_mass", num(gamma), num(mass)});
      offsets.push_back({{"gamma", gamma},
                         {"value", json_number(off.value)},
                         {"z_mass", mass},
                         {"action", bandit_action(top_action(shape, off.rho.support[off.rho.heaviest()], 0))}});
    }
    ScenarioResult out;
    out.scenario = "hedging";
    out.summary = {{"delta", delta},
                   {"gde_member", w.fclass.names[gde.index]},
                   {"gde_action", bandit_action(top_action(shape, gde.pi, 0))},
                   {"gdec", json_number(gdec)},
                   {"ordec_ratio", json_number(ratio.value)},
                   {"ordec_offset", offsets.front().at("value")},
                   {"e2dor_action", offsets.front().at("action")},
                   {"z_mass", offsets.front().at("z_mass")},
                   {"offset", offsets},
                   {"policy_set", ps.description}};
    out.files.emplace_back("results.csv", csv.str());
    return out;
  };
}

Runner prepare_hardness(Reader& r, const Context& ctx) {
  HardnessConfig hc;
  hc.m = static_cast<int>(r.integer("m", hc.m, 1, 50'000'000));
  hc.delta = r.number("delta", hc.delta, 0.0, 0.25);
  hc.n_grid = r.counts("n_grid", hc.n_grid, 0, 100'000'000);
  hc.seeds = static_cast<int>(r.integer("seeds", hc.seeds, 1, 1'000'000));
  hc.algorithms = r.texts("algorithms", hc.algorithms, hardness_algorithms());
  hc.conf_delta = r.number("conf_delta", hc.conf_delta, 0.0, 1.0, true);
  hc.gamma = r.number("gamma", -1.0, 0.0, 1e12, true);
  hc.base_seed = ctx.seed;
  hc.jobs = ctx.jobs;
  const int certify_count = static_cast<int>(r.integer("certify", 0, 0, 10'000));
  if (hc.conf_delta >= 1.0) r.bad("conf_delta", "must be below 1");
  r.add(hc.validate());
  return [=] {
    ScenarioResult out;
    out.scenario = "hardness";
    const auto runs = hardness_experiment(hc);
    CsvTable runs_csv({"algorithm", "n", "m", "delta", "seed", "family", "suboptimality"});
    for (const auto& run : runs) {
      runs_csv.add({run.algorithm, std::to_string(run.n), std::to_string(run.m), num(run.delta),
                    std::to_string(run.seed), to_string(run.family), num(run.suboptimality)});
    }
    CsvTable sum_csv({"algorithm", "n", "count", "mean", "stderr"});
    Json summaries = Json::array();
    std::vector<PlotSeries> series;
    for (const auto& s : summarize(runs)) {
      sum_csv.add({s.algorithm, std::to_string(s.n), std::to_string(s.count), num(s.mean), num(s.std_error)});
      summaries.push_back(
          {{"algorithm", s.algorithm}, {"n", s.n}, {"count", s.count}, {"mean", s.mean}, {"stderr", s.std_error}});
      auto it = std::find_if(series.begin(), series.end(), [&](const PlotSeries& p) { return p.name == s.algorithm; });
      if (it == series.end()) {
        series.push_back({s.algorithm, {}, {}, {}});
        it = series.end() - 1;
      }
      it->x.push_back(static_cast<double>(s.n));
      it->y.push_back(s.mean);
      it->err.push_back(s.std_error);
    }
    out.files.emplace_back("runs.csv", runs_csv.str());
    out.files.emplace_back("summary.csv", sum_csv.str());
    const bool log_x = std::all_of(hc.n_grid.begin(), hc.n_grid.end(), [](std::size_t n) { return n > 0; });
    out.files.emplace_back("suboptimality.svg",
                           svg_line_plot({"Suboptimality vs n (m = " + std::to_string(hc.m) + ", delta = " +
                                              num(hc.delta) + ")",
                                          "n", "suboptimality", log_x},
                                         series));
    Json certs = Json::array();
    if (certify_count > 0) {
      CsvTable cert_csv({"family", "m", "delta", "phi_seed", "realizable", "bellman_complete", "coverage",
                         "optimal_value", "expected_value", "ok"});
      for (std::size_t f = 0; f < std::size(kAllFamilies); ++f) {
        for (int k = 0; k < certify_count; ++k) {
          const std::uint64_t phi = derive_seed(derive_seed(hc.base_seed, 1000 + f), k);
          const auto inst = build_hard_instance(kAllFamilies[f], hc.m, hc.delta, phi);
          const auto c = certify(inst);
          cert_csv.add({to_string(inst.family), std::to_string(hc.m), num(hc.delta), std::to_string(phi),
                        c.realizable ? "true" : "false", c.bellman_complete ? "true" : "false", num(c.coverage),
                        num(c.optimal_value), num(inst.expected_optimal_value()), c.ok() ? "true" : "false"});
          certs.push_back(c.ok());
        }
      }
      out.files.emplace_back("certificates.csv", cert_csv.str());
    }
    const long failed = std::count(certs.begin(), certs.end(), false);
    out.summary = {{"m", hc.m},
                   {"delta", hc.delta},
                   {"n_grid", hc.n_grid},
                   {"seeds", hc.seeds},
                   {"gamma", hc.gamma > 0 ? Json(hc.gamma) : Json("sqrt(n)")},
                   {"summaries", summaries},
                   {"certificates", {{"checked", certs.size()}, {"failed", failed}}}};
    return out;
  };
}

Runner prepare_cql(Reader& r, const Context& ctx) {
  const auto instance_seed = static_cast<std::uint64_t>(r.integer("instance_seed", 7, 0, 1LL << 62));
  const double alpha = r.number("alpha", 0.2, 0.0, 1e3, true);
  const int alternatives = static_cast<int>(r.integer("alternatives", 8, 0, 1000));
  CqlSweepConfig cfg;
  cfg.n_grid = r.counts("n_grid", cfg.n_grid, 1, 100'000'000);
  cfg.seeds = static_cast<int>(r.integer("seeds", cfg.seeds, 1, 1'000'000));
  if (const Json* lam = r.raw("lambda")) {
    if (lam->is_string() && lam->get<std::string>() == "sqrt") {
      cfg.lambda_rule = "sqrt";
    } else if (lam->is_number() && lam->get<double>() >= 0.0 && std::isfinite(lam->get<double>())) {
      cfg.lambda_rule = "constant";
      cfg.lambda = lam->get<double>();
    } else {
      r.bad("lambda", "must be \"sqrt\" or a number >= 0");
    }
  }
  cfg.base_seed = ctx.seed;
  cfg.jobs = ctx.jobs;
  r.add(cfg.validate());
  return [=] {
    const CqlInstance inst = cql_canonical_instance(instance_seed, alpha, alternatives);
    const auto runs = cql_sweep(inst, cfg);
    CsvTable runs_csv({"n", "seed", "lambda", "alpha", "f_hat", "f_hat_s1", "j_pi_star", "j_pi_fhat", "suboptimality"});
    for (const auto& run : runs) {
      runs_csv.add({std::to_string(run.n), std::to_string(run.seed), num(run.lambda), num(run.alpha), run.label,
                    num(run.f_s1), num(run.j_star), num(run.j_hat), num(run.suboptimality)});
    }
    const auto points = summarize_sweep(runs);
    CsvTable sum_csv({"n", "count", "mean", "stderr"});
    PlotSeries series{"cql", {}, {}, {}};
    Json pts = Json::array();
    for (const auto& p : points) {
      sum_csv.add({std::to_string(p.n), std::to_string(p.stats.count), num(p.stats.mean), num(p.stats.std_error)});
      series.x.push_back(static_cast<double>(p.n));
      series.y.push_back(p.stats.mean);
      series.err.push_back(p.stats.std_error);
      Json e = stats_json(p.stats);
      e["n"] = p.n;
      pts.push_back(e);
    }
    ScenarioResult out;
    out.scenario = "cql-sweep";
    out.files.emplace_back("runs.csv", runs_csv.str());
    out.files.emplace_back("summary.csv", sum_csv.str());
    out.files.emplace_back("suboptimality.svg",
                           svg_line_plot({"CQL suboptimality vs n", "n", "J(pi*) - J(pi_fhat)", true}, {series}));
    out.summary = {{"instance_seed", instance_seed},
                   {"alpha", alpha},
                   {"alternatives", alternatives},
                   {"lambda", cfg.lambda_rule == "sqrt" ? Json("sqrt(n)") : Json(cfg.lambda)},
                   {"admissible", check_admissible(inst.mdp, inst.mu)},
                   {"j_pi_star", inst.optimal.j},
                   {"points", pts},
                   {"non_increasing_2se", non_increasing_within(points, 2.0)}};
    return out;
  };
}

ScenarioResult suite_result(const std::string& scenario, const std::vector<SuiteReport>& reports, Json params) {
  CsvTable csv({"suite", "property", "checked", "violations", "skipped", "worst_excess"});
  Json props = Json::array();
  long total = 0;
  for (const auto& rep : reports) {
    for (const auto& p : rep.properties) {
      const double worst = p.checked > 0 ? p.worst_excess : 0.0;
      csv.add({rep.suite, p.name, std::to_string(p.checked), std::to_string(p.violations), std::to_string(p.skipped),
               num(worst)});
      props.push_back({{"suite", rep.suite},
                       {"property", p.name},
                       {"checked", p.checked},
                       {"violations", p.violations},
                       {"skipped", p.skipped},
                       {"worst_excess", json_number(worst)}});
    }
    total += rep.violations();
  }
  const auto games = game_stats();
  ScenarioResult out;
  out.scenario = scenario;
  out.files.emplace_back("properties.csv", csv.str());
  out.summary = std::move(params);
  out.summary["violations"] = total;
  out.summary["properties"] = props;
  out.summary["games_solved"] = games.solved;
  out.summary["max_duality_gap"] = games.max_gap;
  return out;
}

Runner prepare_regularizer_suite(Reader& r, const Context& ctx) {
  const int cases = static_cast<int>(r.integer("cases", 500, 1, 10'000'000));
  const int pairs = static_cast<int>(r.integer("pairs", 100, 1, 1'000'000));
  const std::uint64_t seed = ctx.seed;
  return [=] {
    reset_game_stats();
    return suite_result("regularizer-suite",
                        {regularizer_suite(cases, derive_seed(seed, 1)), second_order_pdl_suite(pairs, derive_seed(seed, 2))},
                        {{"cases", cases}, {"pairs", pairs}});
  };
}

Runner prepare_inequality_suite(Reader& r, const Context& ctx) {
  const int instances = static_cast<int>(r.integer("instances", 100, 1, 1'000'000));
  const double tol = r.number("tol", 1e-7, 0.0, 1.0);
  const double min_gap = r.number("min_gap", 0.05, 0.0, 1.0, true);
  const std::uint64_t seed = ctx.seed;
  return [=] {
    reset_game_stats();
    return suite_result("inequality-suite",
                        {decision_property_suite(instances, derive_seed(seed, 1), tol),
                         exploitability_suite(instances, derive_seed(seed, 2), min_gap)},
                        {{"instances", instances}, {"tol", tol}, {"min_gap", min_gap}});
  };
}

// Custom inputs. Loading doubles as validation: every problem is recorded
// against the file it came from.

std::optional<Json> read_json_file(const fs::path& path, std::vector<std::string>& findings) {
  if (!fs::exists(path)) {
    findings.push_back("missing file " + path.string());
    return std::nullopt;
  }
  try {
    return Json::parse(read_text(path));
  } catch (const std::exception& e) {
    findings.push_back(path.string() + ": " + e.what());
    return std::nullopt;
  }
}

template <class F>
void collect(const std::string& where, std::vector<std::string>& findings, F&& load) {
  try {
    load();
  } catch (const ValidationError& e) {
    for (const auto& f : e.findings()) findings.push_back(where + ": " + f);
  } catch (const std::exception& e) {
    findings.push_back(where + ": " + e.what());
  }
}

std::optional<LayeredMDP> load_model(const fs::path& path, std::vector<std::string>& findings) {
  const auto doc = read_json_file(path, findings);
  if (!doc) return std::nullopt;
  std::optional<LayeredMDP> out;
  collect(path.string(), findings, [&] {
    LayeredMDP m = mdp_from_json(*doc);
    const auto problems = m.validate();
    if (!problems.empty()) throw ValidationError(problems);
    out = std::move(m);
  });
  return out;
}

bool same_shape(const LayeredMDP& a, const LayeredMDP& b) {
  if (a.num_states() != b.num_states() || a.horizon() != b.horizon()) return false;
  for (int s = 0; s < a.num_states(); ++s) {
    if (a.layer_of(s) != b.layer_of(s) || a.num_actions(s) != b.num_actions(s)) return false;
  }
  return true;
}

std::vector<std::string> check_dataset(const LayeredMDP& mdp, const OfflineDataset& data) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < data.size() && out.size() < 20; ++i) {
    const auto& t = data.tuples[i];
    const std::string where = "record " + std::to_string(i + 1);
    if (t.s < 0 || t.s >= mdp.num_states() || t.a < 0 || t.a >= mdp.num_actions(t.s)) {
      out.push_back(where + " names unknown pair (s=" + std::to_string(t.s) + ", a=" + std::to_string(t.a) + ")");
      continue;
    }
    const bool terminal = mdp.is_terminal(t.s);
    if (terminal ? t.next != -1
                 : (t.next < 0 || t.next >= mdp.num_states() || mdp.layer_of(t.next) != mdp.layer_of(t.s) + 1)) {
      out.push_back(where + " has an impossible successor " + std::to_string(t.next));
    }
  }
  return out;
}

Runner prepare_custom(Reader& r, const Context& ctx) {
  auto& findings = r.findings();
  auto resolve = [&](const std::string& p) {
    const fs::path q(p);
    return q.is_absolute() ? q : ctx.base_dir / q;
  };
  const std::string mdp_path = r.text("mdp", "");
  if (mdp_path.empty()) r.bad("mdp", "is required");
  const auto model_paths = r.texts("models", {});
  const Json* reg_doc = r.raw("regularizer");
  const std::string fclass_path = r.text("fclass", "");
  const std::string gclass_path = r.text("gclass", "");
  const std::string dataset_path = r.text("dataset", "");
  const std::string mu_spec = r.text("mu", "uniform");
  const std::size_t n = static_cast<std::size_t>(r.integer("n", 1000, 1, 100'000'000));
  const std::string method = r.text("method", "bc", {"bc", "full"});
  const double conf_delta = r.number("conf_delta", 0.1, 0.0, 1.0, true);
  const auto gammas = r.numbers("gamma", {1.0}, 0.0, 1e12, true);
  if (conf_delta >= 1.0) r.bad("conf_delta", "must be below 1");

  std::optional<LayeredMDP> truth;
  if (!mdp_path.empty()) truth = load_model(resolve(mdp_path), findings);

  Regularizer reg = Regularizer::none();
  if (reg_doc) {
    collect("regularizer", findings, [&] {
      reg = regularizer_from_json(*reg_doc);
      if (truth && !reg.pi_ref.empty()) {
        std::vector<std::string> problems;
        if (reg.pi_ref.size() != static_cast<std::size_t>(truth->num_states())) {
          problems.push_back("pi_ref needs one row per state");
        } else {
          for (int s = 0; s < truth->num_states(); ++s) {
            if (reg.pi_ref[s].size() != static_cast<std::size_t>(truth->num_actions(s))) {
              problems.push_back("pi_ref row of state " + std::to_string(s) + " has the wrong length");
            }
          }
        }
        if (!problems.empty()) throw ValidationError(problems);
      }
    });
  }

  CandidateModelSet cands;
  cands.reg = reg;
  std::vector<std::string> universe = model_paths.empty() ? std::vector<std::string>{mdp_path} : model_paths;
  for (const auto& p : universe) {
    if (p.empty()) continue;
    if (p == mdp_path && !truth) continue;
    auto m = p == mdp_path ? truth : load_model(resolve(p), findings);
    if (!m) continue;
    if (truth && !same_shape(*m, *truth)) {
      findings.push_back(resolve(p).string() + ": shape differs from " + mdp_path);
      continue;
    }
    cands.add(std::move(*m), fs::path(p).stem().string());
  }

  FunctionClass fclass;
  FunctionClass gclass;
  bool fclass_ok = false;
  if (truth) {
    if (!fclass_path.empty()) {
      if (auto doc = read_json_file(resolve(fclass_path), findings)) {
        collect(resolve(fclass_path).string(), findings, [&] {
          fclass = function_class_from_json(*truth, *doc);
          fclass_ok = true;
        });
      }
    } else if (findings.empty()) {
      for (std::size_t k = 0; k < cands.size(); ++k) {
        fclass.add(solve_optimal(cands.models[k], reg).q, "q_" + cands.names[k]);
      }
      fclass_ok = true;
    }
    if (fclass_ok && fclass.size() == 0) findings.push_back("function class is empty");
    if (!gclass_path.empty()) {
      if (auto doc = read_json_file(resolve(gclass_path), findings)) {
        collect(resolve(gclass_path).string(), findings, [&] { gclass = function_class_from_json(*truth, *doc); });
      }
    } else if (fclass_ok && findings.empty()) {
      for (std::size_t i = 0; i < fclass.size(); ++i) {
        gclass.add(bellman_apply(*truth, reg, fclass.members[i]), "T_" + fclass.names[i]);
      }
      for (std::size_t i = 0; i < fclass.size(); ++i) gclass.add(fclass.members[i], fclass.names[i]);
    }
  }

  OfflineDataset data;
  DataDistribution mu;
  if (truth && method == "bc") {
    if (!dataset_path.empty()) {
      const fs::path p = resolve(dataset_path);
      if (!fs::exists(p)) {
        findings.push_back("missing file " + p.string());
      } else {
        collect(p.string(), findings, [&] {
          data = read_dataset(p);
          const auto problems = check_dataset(*truth, data);
          if (!problems.empty()) throw ValidationError(problems);
          if (data.empty()) throw ValidationError({"dataset is empty"});
        });
      }
    } else if (mu_spec == "uniform") {
      mu.assign(static_cast<std::size_t>(truth->num_state_actions()), 1.0 / truth->num_state_actions());
    } else if (auto doc = read_json_file(resolve(mu_spec), findings)) {
      collect(resolve(mu_spec).string(), findings, [&] {
        mu = table_from_json(*truth, *doc);
        const auto problems = validate_distribution(*truth, mu);
        if (!problems.empty()) throw ValidationError(problems);
      });
    }
  }

  const std::uint64_t seed = ctx.seed;
  return [=]() mutable {
    if (data.empty() && method == "bc") data = sample_dataset(*truth, mu, n, seed);
    const ConfidenceSet conf = method == "full" ? full_confidence_set(fclass)
                                                : build_conf_bc(*truth, data, fclass, gclass, reg, conf_delta);
    cands.solve();
    const ValueSolution best = solve_optimal(*truth, reg);
    ScenarioResult out;
    out.scenario = "custom";
    out.summary["confidence"] = confidence_set_to_json(conf, fclass);
    out.summary["j_pi_star"] = best.j;
    out.summary["data_size"] = data.size();
    CsvTable csv({"algorithm", "gamma", "value", "suboptimality", "detail"});
    if (conf.indices.empty()) {
      out.summary["note"] = "confidence set is empty";
      out.files.emplace_back("results.csv", csv.str());
      return out;
    }
    const auto fs_conf = conf_members(conf, fclass);
    const GdeResult gde = gde_select(*truth, conf, fclass, reg);
    const double gde_regret = regret(*truth, reg, best, gde.pi);
    csv.add({"gde", "", num(gde.value), num(gde_regret), fclass.names[gde.index]});
    out.summary["gde"] = {{"member", fclass.names[gde.index]}, {"value", gde.value}, {"suboptimality", gde_regret}};

    const CandidateModelSet mconf = induce_model_set(cands, conf, fclass, 1e-9);
    Json induced = Json::array();
    for (const auto& name : mconf.names) induced.push_back(name);
    out.summary["induced_models"] = induced;
    if (mconf.empty()) {
      out.summary["note"] = "no candidate model has its Q* in the confidence set";
    } else {
      const PolicySet ps = build_policy_set(mconf, fs_conf);
      Json decisions = Json::array();
      Json diagnostics = Json::array();
      for (double gamma : gammas) {
        const auto off = e2dor_offset(mconf, fs_conf, ps.policies, gamma);
        const double sub = suboptimality(*truth, reg, off.rho);
        csv.add({"e2dor-offset", num(gamma), num(off.value), num(sub), "support=" + std::to_string(off.rho.support.size())});
        decisions.push_back({{"rule", "offset"}, {"gamma", gamma}, {"value", json_number(off.value)}, {"suboptimality", sub}});
        diagnostics.push_back(diagnostics_to_json(compute_diagnostics(mconf, fs_conf, ps, gde.f, gamma)));
      }
      const auto ratio = e2dor_ratio(mconf, fs_conf, ps.policies);
      const double sub = ratio.unbounded ? kUnbounded : suboptimality(*truth, reg, ratio.rho);
      csv.add({"e2dor-ratio", "", num(ratio.value), num(sub), ratio.unbounded ? "unbounded" : ""});
      decisions.push_back({{"rule", "ratio"}, {"value", json_number(ratio.value)}, {"suboptimality", json_number(sub)}});
      out.summary["e2dor"] = decisions;
      out.summary["diagnostics"] = diagnostics;
      out.summary["policy_set"] = ps.description;
    }
    out.files.emplace_back("results.csv", csv.str());
    out.files.emplace_back("confidence.json", confidence_set_to_json(conf, fclass).dump(2) + "\n");
    return out;
  };
}

Runner prepare(const Json& config, const ScenarioOptions& options, std::vector<std::string>& findings) {
  if (!config.is_object()) {
    findings.push_back("config must be a JSON object");
    return {};
  }
  Reader r(config, findings);
  const std::string scenario = r.text("scenario", "");
  if (scenario.empty() && !config.contains("scenario")) r.bad("scenario", "is required");
  Context ctx;
  ctx.seed = static_cast<std::uint64_t>(r.integer("seed", 1, 0, (1LL << 62)));
  if (options.seed) ctx.seed = *options.seed;
  ctx.jobs = options.jobs;
  ctx.base_dir = options.base_dir;
  r.has("out");
  if (options.jobs < 1) findings.push_back("jobs must be at least 1");

  Runner runner;
  if (scenario == "robust-choice") {
    runner = prepare_robust_choice(r, ctx);
  } else if (scenario == "hedging") {
    runner = prepare_hedging(r, ctx);
  } else if (scenario == "hardness") {
    runner = prepare_hardness(r, ctx);
  } else if (scenario == "cql-sweep") {
    runner = prepare_cql(r, ctx);
  } else if (scenario == "regularizer-suite") {
    runner = prepare_regularizer_suite(r, ctx);
  } else if (scenario == "inequality-suite") {
    runner = prepare_inequality_suite(r, ctx);
  } else if (scenario == "custom") {
    runner = prepare_custom(r, ctx);
  } else if (!scenario.empty()) {
    r.bad("scenario", "'" + scenario + "' must be one of: " + join(scenario_names()));
  }
  if (runner) r.finish();
  return runner;
}

}  // namespace

std::vector<std::string> validate_config(const Json& config, const ScenarioOptions& options) {
  std::vector<std::string> findings;
  prepare(config, options, findings);
  return findings;
}

ScenarioResult run_scenario(const Json& config, const ScenarioOptions& options) {
  std::vector<std::string> findings;
  Runner runner = prepare(config, options, findings);
  if (!findings.empty() || !runner) throw ValidationError(findings);
  return runner();
}

Json effective_config(const Json& config, const ScenarioOptions& options) {
  Json out = config;
  if (options.seed) out["seed"] = *options.seed;
  if (!out.contains("seed")) out["seed"] = 1;
  out.erase("out");
  return out;
}

Json make_manifest(const Json& config, const ScenarioResult& result) {
  Json files = Json::array();
  for (const auto& f : result.files) files.push_back(f.first);
  files.push_back("summary.json");
  return {{"tool", "offrl"},
          {"version", offrl_version()},
          {"scenario", result.scenario},
          {"seed", config.value("seed", Json(1))},
          {"config", config},
          {"config_hash", hex_digest(fnv1a64(config.dump()))},
          {"files", files}};
}

void write_artifacts(const fs::path& out_dir, const Json& config, const ScenarioResult& result) {
  for (const auto& [name, content] : result.files) write_text(out_dir / name, content);
  write_text(out_dir / "summary.json", result.summary.dump(2) + "\n");
  write_text(out_dir / "manifest.json", make_manifest(config, result).dump(2) + "\n");
}

}  // namespace offrl
