#include <filesystem>

#include "doctest.h"
#include "offrl/scenario.hpp"

using namespace offrl;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = OFFRL_CONFIG_DIR;

Json load(const fs::path& p) { return Json::parse(read_text(p)); }

bool mentions(const std::vector<std::string>& findings, const std::string& needle) {
  for (const auto& f : findings) {
    if (f.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("bundled configs validate") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".json") continue;
    ScenarioOptions opt;
    opt.base_dir = kConfigs;
    const auto findings = validate_config(load(entry.path()), opt);
    CHECK_MESSAGE(findings.empty(), entry.path().filename().string());
    ++count;
  }
  CHECK(count >= 8);
}

TEST_CASE("bandit scenarios") {
  const auto robust = run_scenario(Json{{"scenario", "robust-choice"}});
  CHECK(robust.summary.at("gde_action") == "y");
  CHECK(robust.summary.at("robust_action") == "x");
  CHECK(robust.summary.at("subopt_fx_world").at("gde").get<double>() == doctest::Approx(1.0));
  CHECK(robust.summary.at("subopt_fx_world").at("robust").get<double>() == doctest::Approx(0.0));
  CHECK(robust.summary.at("subopt_fy_world").at("robust").get<double>() == doctest::Approx(0.02));

  const auto hedge = run_scenario(Json{{"scenario", "hedging"}});
  CHECK(hedge.summary.at("gdec").get<double>() == doctest::Approx(1.0));
  CHECK(hedge.summary.at("ordec_ratio").get<double>() <= 0.01 + 1e-9);
  CHECK(hedge.summary.at("ordec_offset").get<double>() <= 0.0075 + 1e-9);
  CHECK(hedge.summary.at("e2dor_action") == "z");
  CHECK(hedge.summary.at("z_mass").get<double>() >= 0.99);
}

TEST_CASE("invalid configs list every finding") {
  const Json bad = {{"scenario", "hardness"}, {"m", 0}, {"seeds", "x"}, {"bogus", 1}, {"algorithms", {"foo"}}};
  const auto findings = validate_config(bad);
  CHECK(findings.size() >= 4);
  CHECK(mentions(findings, "bogus"));
  CHECK(mentions(findings, "seeds"));
  CHECK(mentions(findings, "foo"));
  CHECK_THROWS_AS(run_scenario(bad), ValidationError);

  CHECK(mentions(validate_config(Json{{"scenario", "nope"}}), "nope"));
  CHECK_FALSE(validate_config(Json::array()).empty());

  const Json missing = {{"scenario", "custom"}, {"mdp", "no/such/file.json"}, {"models", {"no/such/file.json"}}};
  const auto mf = validate_config(missing);
  CHECK(mentions(mf, "missing file"));
  CHECK(mf.size() == 1);
}

TEST_CASE("runs are deterministic and write a manifest") {
  const Json cfg = {{"scenario", "hardness"}, {"m", 40}, {"n_grid", {0, 10}}, {"seeds", 4}, {"certify", 1}};
  ScenarioOptions one;
  ScenarioOptions two;
  two.jobs = 2;
  const auto a = run_scenario(cfg, one);
  const auto b = run_scenario(cfg, two);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    CHECK(a.files[i].first == b.files[i].first);
    CHECK(a.files[i].second == b.files[i].second);
  }

  ScenarioOptions seeded;
  seeded.seed = 5;
  const auto eff = effective_config(cfg, seeded);
  CHECK(eff.at("seed") == 5);
  const auto manifest = make_manifest(eff, a);
  CHECK(manifest.at("scenario") == "hardness");
  CHECK(manifest.at("version") == offrl_version());
  CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
  CHECK(make_manifest(eff, a).at("config_hash") == manifest.at("config_hash"));
  CHECK(make_manifest(effective_config(cfg, one), a).at("config_hash") != manifest.at("config_hash"));

  const auto dir = fs::temp_directory_path() / "offrl_test_artifacts";
  fs::remove_all(dir);
  write_artifacts(dir, eff, a);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "summary.json"));
  for (const auto& [name, content] : a.files) CHECK(read_text(dir / name) == content);
}

TEST_CASE("custom scenario on bundled inputs") {
  ScenarioOptions opt;
  opt.base_dir = kConfigs;
  const auto res = run_scenario(load(kConfigs / "custom.json"), opt);
  CHECK(res.scenario == "custom");
  bool has_results = false;
  for (const auto& [name, content] : res.files) has_results |= name == "results.csv";
  CHECK(has_results);
}
