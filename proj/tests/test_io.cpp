#include <filesystem>

#include "doctest.h"
#include "offrl/instances.hpp"
#include "offrl/io.hpp"

using namespace offrl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("offrl_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("mdp documents round-trip byte for byte") {
  Rng rng(2);
  RandomMdpSpec spec;
  spec.layer_sizes = {1, 3, 2};
  spec.max_actions = 3;
  spec.bernoulli_rewards = true;
  const auto m = random_mdp(spec, rng);
  const std::string text = canonical_mdp(m);
  const auto back = mdp_from_json(Json::parse(text));
  CHECK(canonical_mdp(back) == text);
  CHECK(mdp_hash(back) == mdp_hash(m));
  for (int s = 0; s < m.num_states(); ++s) {
    for (int a = 0; a < m.num_actions(s); ++a) {
      CHECK(back.reward(s, a) == m.reward(s, a));
      CHECK(back.noise(s, a) == m.noise(s, a));
    }
  }
  const auto dir = scratch_dir("mdp");
  save_mdp(dir / "m.json", m);
  CHECK(read_text(dir / "m.json").find(text) != std::string::npos);
  CHECK(canonical_mdp(load_mdp(dir / "m.json")) == text);

  LayeredMDP other = m;
  other.set_reward(0, 0, 0.123);
  CHECK(mdp_hash(other) != mdp_hash(m));
}

TEST_CASE("malformed mdp documents are rejected") {
  CHECK_THROWS(mdp_from_json(Json::parse(R"({"layers": [[0]]})")));
  CHECK_THROWS(load_mdp(fs::temp_directory_path() / "offrl_no_such_file.json"));
}

TEST_CASE("regularizer and function class documents") {
  Regularizer reg = Regularizer::tsallis(0.7, 0.4);
  reg.pi_ref = {{0.25, 0.75}};
  const auto back = regularizer_from_json(regularizer_to_json(reg));
  CHECK(back.kind == RegKind::Tsallis);
  CHECK(back.alpha == 0.7);
  CHECK(back.tsallis_q == 0.4);
  CHECK(back.pi_ref == reg.pi_ref);

  LayeredMDP m({{0}, {1, 2}}, {2, 1, 3});
  FunctionClass fc;
  fc.add({0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, "first");
  fc.add({1, 2, 3, 4, 5, 6}, "second");
  const auto fc2 = function_class_from_json(m, function_class_to_json(m, fc));
  CHECK(fc2.names == fc.names);
  CHECK(fc2.members == fc.members);
  const SATable t{1, 0, 1, 0.5, 0.25, 0.25};
  CHECK(table_from_json(m, table_to_json(m, t)) == t);
}

TEST_CASE("infinities serialize as strings") {
  CHECK(json_number(kUnbounded) == "inf");
  CHECK(json_number(-kUnbounded) == "-inf");
  CHECK(json_number(1.5) == 1.5);
  CHECK(is_unbounded(json_to_double(Json("inf"))));
  CHECK(json_to_double(Json(2.0)) == 2.0);
  ConfidenceSet cs = full_confidence_set(FunctionClass{{{0.0}}, {"only"}});
  const auto doc = confidence_set_to_json(cs, FunctionClass{{{0.0}}, {"only"}});
  CHECK(doc.dump().find("\"inf\"") != std::string::npos);
}

TEST_CASE("datasets round-trip") {
  Rng rng(4);
  RandomMdpSpec spec;
  const auto m = random_mdp(spec, rng);
  auto data = sample_dataset(m, random_distribution(m, rng), 300, 77);
  data.mdp_hash = mdp_hash(m);
  data.mu_tag = "random";
  const auto dir = scratch_dir("data");
  write_dataset(dir / "d.jsonl", data);
  const auto back = read_dataset(dir / "d.jsonl");
  CHECK(back.tuples == data.tuples);
  CHECK(back.seed == 77);
  CHECK(back.mdp_hash == data.mdp_hash);
  CHECK(back.mu_tag == "random");
}

TEST_CASE("csv quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  CsvTable t({"x", "y"});
  t.add({"1", "a,b"});
  CHECK(t.str() == "x,y\r\n1,\"a,b\"\r\n");
  CHECK(t.rows() == 1);
}

TEST_CASE("svg plot") {
  PlotSpec spec{"title", "n", "value", true};
  PlotSeries s{"series <1>", {10, 100, 1000}, {0.5, 0.2, 0.1}, {0.01, 0.02, 0.01}};
  const auto svg = svg_line_plot(spec, {s});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("series &lt;1&gt;") != std::string::npos);
}
