#include "offrl/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace offrl {

namespace {

// JSON has no infinity; unbounded values travel as the string "inf".
Json number(double x) {
  if (std::isinf(x)) return x > 0 ? Json("inf") : Json("-inf");
  return Json(x);
}

double as_number(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kUnbounded;
    if (s == "-inf") return -kUnbounded;
    throw DomainError("expected a number, got '" + s + "'");
  }
  return j.get<double>();
}

}  // namespace

Json json_number(double x) { return number(x); }
double json_to_double(const Json& j) { return as_number(j); }

namespace {

std::string noise_name(RewardNoise n) { return n == RewardNoise::Bernoulli ? "bernoulli" : "deterministic"; }

RewardNoise noise_from(const std::string& name) {
  if (name == "deterministic") return RewardNoise::Deterministic;
  if (name == "bernoulli") return RewardNoise::Bernoulli;
  throw DomainError("unknown reward noise '" + name + "'");
}

}  // namespace

Json mdp_to_json(const LayeredMDP& mdp) {
  Json doc;
  doc["format"] = "offrl-mdp";
  doc["version"] = 1;
  doc["horizon"] = mdp.horizon();
  doc["initial_state"] = mdp.initial_state();
  doc["layers"] = mdp.layers();
  doc["extended_reward_range"] = mdp.extended_reward_range();
  Json actions = Json::array();
  Json rewards = Json::array();
  Json transitions = Json::array();
  for (int s = 0; s < mdp.num_states(); ++s) {
    actions.push_back(mdp.num_actions(s));
    for (int a = 0; a < mdp.num_actions(s); ++a) {
      rewards.push_back({s, a, mdp.reward(s, a), noise_name(mdp.noise(s, a))});
      for (const auto& nx : mdp.next(s, a)) transitions.push_back({s, a, nx.state, nx.prob});
    }
  }
  doc["actions"] = std::move(actions);
  doc["rewards"] = std::move(rewards);
  doc["transitions"] = std::move(transitions);
  return doc;
}

LayeredMDP mdp_from_json(const Json& doc) {
  std::vector<std::string> findings;
  for (const char* key : {"layers", "actions", "rewards", "transitions"}) {
    if (!doc.contains(key)) findings.push_back(std::string("mdp document: missing field '") + key + "'");
  }
  if (!findings.empty()) throw ValidationError(findings);
  auto layers = doc.at("layers").get<std::vector<std::vector<int>>>();
  Json actions = doc.at("actions");
  std::vector<int> counts;
  if (actions.is_number_integer()) {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.size();
    counts.assign(n, actions.get<int>());
  } else {
    counts = actions.get<std::vector<int>>();
  }
  LayeredMDP mdp(std::move(layers), std::move(counts));
  mdp.set_extended_reward_range(doc.value("extended_reward_range", false));
  if (doc.contains("horizon") && doc.at("horizon").get<int>() != mdp.horizon()) {
    findings.push_back("mdp document: horizon does not match the number of layers");
  }
  if (doc.contains("initial_state") && doc.at("initial_state").get<int>() != mdp.initial_state()) {
    findings.push_back("mdp document: initial_state is not the first layer's state");
  }
  auto in_range = [&](int s, int a, const std::string& what) {
    if (s < 0 || s >= mdp.num_states() || a < 0 || a >= mdp.num_actions(s)) {
      findings.push_back(what + " names unknown pair (s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")");
      return false;
    }
    return true;
  };
  for (const auto& r : doc.at("rewards")) {
    const int s = r.at(0).get<int>();
    const int a = r.at(1).get<int>();
    if (!in_range(s, a, "reward")) continue;
    mdp.set_reward(s, a, r.at(2).get<double>(),
                   r.size() > 3 ? noise_from(r.at(3).get<std::string>()) : RewardNoise::Deterministic);
  }
  // Triplets are grouped per (s, a) before the rows are installed.
  std::vector<std::vector<Successor>> rows(static_cast<std::size_t>(mdp.num_state_actions()));
  for (const auto& t : doc.at("transitions")) {
    const int s = t.at(0).get<int>();
    const int a = t.at(1).get<int>();
    if (!in_range(s, a, "transition")) continue;
    rows[mdp.sa(s, a)].push_back({t.at(2).get<int>(), t.at(3).get<double>()});
  }
  if (!findings.empty()) throw ValidationError(findings);
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(s); ++a) {
      if (!rows[mdp.sa(s, a)].empty()) mdp.set_transition(s, a, rows[mdp.sa(s, a)]);
    }
  }
  return mdp;
}

std::string canonical_mdp(const LayeredMDP& mdp) { return mdp_to_json(mdp).dump(); }

std::string mdp_hash(const LayeredMDP& mdp) { return hex_digest(fnv1a64(canonical_mdp(mdp))); }

void save_mdp(const std::filesystem::path& path, const LayeredMDP& mdp) {
  write_text(path, canonical_mdp(mdp) + "\n");
}

LayeredMDP load_mdp(const std::filesystem::path& path) { return mdp_from_json(Json::parse(read_text(path))); }

Json regularizer_to_json(const Regularizer& reg) {
  Json doc;
  doc["kind"] = to_string(reg.kind);
  doc["alpha"] = reg.alpha;
  if (reg.kind == RegKind::Tsallis) doc["q"] = reg.tsallis_q;
  if (reg.pi_ref.empty()) {
    doc["pi_ref"] = "uniform";
  } else {
    doc["pi_ref"] = reg.pi_ref;
  }
  return doc;
}

Regularizer regularizer_from_json(const Json& doc) {
  const auto kind = reg_kind_from_string(doc.value("kind", std::string("none")));
  const double alpha = doc.value("alpha", 0.0);
  Regularizer reg;
  switch (kind) {
    case RegKind::None:
      reg = Regularizer::none();
      break;
    case RegKind::Shannon:
      reg = Regularizer::shannon(alpha);
      break;
    case RegKind::Tsallis:
      reg = Regularizer::tsallis(alpha, doc.value("q", 0.5));
      break;
    case RegKind::LogBarrier:
      reg = Regularizer::log_barrier(alpha);
      break;
  }
  if (doc.contains("pi_ref") && doc.at("pi_ref").is_array()) {
    reg.pi_ref = doc.at("pi_ref").get<std::vector<std::vector<double>>>();
  }
  std::vector<std::string> findings;
  reg.validate(findings);
  if (!findings.empty()) throw ValidationError(findings);
  return reg;
}

Json table_to_json(const LayeredMDP& shape, const SATable& t) {
  Json rows = Json::array();
  for (int s = 0; s < shape.num_states(); ++s) {
    const auto r = shape.row(t, s);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

SATable table_from_json(const LayeredMDP& shape, const Json& doc) {
  if (!doc.is_array() || doc.size() != static_cast<std::size_t>(shape.num_states())) {
    throw ValidationError({"table: expected one row per state (" + std::to_string(shape.num_states()) + ")"});
  }
  SATable t(static_cast<std::size_t>(shape.num_state_actions()), 0.0);
  std::vector<std::string> findings;
  for (int s = 0; s < shape.num_states(); ++s) {
    const auto& row = doc[static_cast<std::size_t>(s)];
    if (row.size() != static_cast<std::size_t>(shape.num_actions(s))) {
      findings.push_back("table: row of state " + std::to_string(s) + " has " + std::to_string(row.size()) +
                         " entries, expected " + std::to_string(shape.num_actions(s)));
      continue;
    }
    for (int a = 0; a < shape.num_actions(s); ++a) t[shape.sa(s, a)] = as_number(row[static_cast<std::size_t>(a)]);
  }
  if (!findings.empty()) throw ValidationError(findings);
  return t;
}

Json function_class_to_json(const LayeredMDP& shape, const FunctionClass& fc) {
  Json members = Json::array();
  for (std::size_t i = 0; i < fc.size(); ++i) {
    members.push_back({{"name", fc.names[i]}, {"values", table_to_json(shape, fc.members[i])}});
  }
  return {{"members", members}};
}

FunctionClass function_class_from_json(const LayeredMDP& shape, const Json& doc) {
  FunctionClass fc;
  const Json& members = doc.is_array() ? doc : doc.at("members");
  for (const auto& m : members) fc.add(table_from_json(shape, m.at("values")), m.at("name").get<std::string>());
  const auto findings = validate_function_class(shape, fc);
  if (!findings.empty()) throw ValidationError(findings);
  return fc;
}

Json confidence_set_to_json(const ConfidenceSet& conf, const FunctionClass& fc) {
  Json included = Json::array();
  for (int i : conf.indices) included.push_back(fc.names[i]);
  Json losses = Json::object();
  for (std::size_t i = 0; i < conf.losses.size() && i < fc.size(); ++i) losses[fc.names[i]] = number(conf.losses[i]);
  return {{"method", to_string(conf.method)},
          {"delta", conf.delta},
          {"eps_stat", number(conf.eps_stat)},
          {"included", included},
          {"losses", losses}};
}

Json diagnostics_to_json(const DecisionDiagnostics& diag) {
  Json er = Json::array();
  for (double x : diag.er) er.push_back(number(x));
  Json gap = Json::array();
  for (double x : diag.gap) gap.push_back(number(x));
  return {{"gamma", diag.gamma},
          {"ordec_offset", number(diag.ordec_offset)},
          {"ordec_ratio", number(diag.ordec_ratio)},
          {"gdec", number(diag.gdec)},
          {"er", er},
          {"gap", gap},
          {"policy_set", diag.policy_set},
          {"ratio_unbounded", diag.ratio_unbounded},
          {"gdec_unbounded", diag.gdec_unbounded}};
}

void write_dataset(const std::filesystem::path& path, const OfflineDataset& data) {
  std::ostringstream out;
  const Json header{{"n", data.size()}, {"seed", data.seed}, {"mu", data.mu_tag}, {"mdp_hash", data.mdp_hash}};
  out << header.dump() << '\n';
  for (const auto& t : data.tuples) {
    out << t.s << ',' << t.a << ',' << format_double(t.r) << ',' << t.next << '\n';
  }
  write_text(path, out.str());
}

OfflineDataset read_dataset(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw ValidationError({"dataset " + path.string() + ": missing header"});
  const Json header = Json::parse(line);
  OfflineDataset data;
  data.seed = header.value("seed", std::uint64_t{0});
  data.mu_tag = header.value("mu", std::string());
  data.mdp_hash = header.value("mdp_hash", std::string());
  std::vector<std::string> findings;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Transition t;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream rec(line);
    if (!(rec >> t.s >> c1 >> t.a >> c2 >> t.r >> c3 >> t.next) || c1 != ',' || c2 != ',' || c3 != ',') {
      findings.push_back("dataset " + path.string() + ": malformed record on line " + std::to_string(lineno));
      continue;
    }
    data.tuples.push_back(t);
  }
  if (header.contains("n") && header.at("n").get<std::size_t>() != data.size()) {
    findings.push_back("dataset " + path.string() + ": header declares " + header.at("n").dump() +
                       " records, found " + std::to_string(data.size()));
  }
  if (!findings.empty()) throw ValidationError(findings);
  return data;
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += "\r\n";
  return out;
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw DomainError("csv: row width does not match the header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out = csv_row(header_);
  for (const auto& r : rows_) out += csv_row(r);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string fixed(double x, int digits = 2) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << x;
  return o.str();
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string svg_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  const double width = 640, height = 420;
  const double left = 70, right = 170, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;

  auto tx = [&](double x) { return spec.log_x ? std::log10(std::max(x, 1e-300)) : x; };
  double x0 = kUnbounded, x1 = -kUnbounded, y0 = kUnbounded, y1 = -kUnbounded;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (spec.log_x && s.x[i] <= 0.0) continue;
      const double e = i < s.err.size() ? s.err[i] : 0.0;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, s.y[i] - e);
      y1 = std::max(y1, s.y[i] + e);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return left + (tx(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << xml_escape(spec.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = y0 + (y1 - y0) * k / 4.0;
    o << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(yv) + 4) << "\" text-anchor=\"end\">"
      << fixed(yv, 3) << "</text>\n";
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double shown = spec.log_x ? std::pow(10.0, xv) : xv;
    o << "<text x=\"" << fixed(left + pw * k / 4.0) << "\" y=\"" << top + ph + 18
      << "\" text-anchor=\"middle\">" << xml_escape(format_double(std::round(shown * 1000) / 1000))
      << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">"
    << xml_escape(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << xml_escape(spec.y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (spec.log_x && s.x[i] <= 0.0) continue;
      points += fixed(px(s.x[i])) + "," + fixed(py(s.y[i])) + " ";
      if (i < s.err.size() && s.err[i] > 0.0) {
        o << "<line x1=\"" << fixed(px(s.x[i])) << "\" x2=\"" << fixed(px(s.x[i])) << "\" y1=\""
          << fixed(py(s.y[i] - s.err[i])) << "\" y2=\"" << fixed(py(s.y[i] + s.err[i])) << "\" stroke=\""
          << color << "\"/>\n";
      }
    }
    o << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << color << "\" points=\"" << points
      << "\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(k);
    o << "<line x1=\"" << left + pw + 10 << "\" x2=\"" << left + pw + 30 << "\" y1=\"" << ly << "\" y2=\""
      << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace offrl
