#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "offrl/cql.hpp"
#include "offrl/data.hpp"
#include "offrl/decision.hpp"
#include "offrl/estimation.hpp"
#include "offrl/mdp.hpp"

namespace offrl {

using Json = nlohmann::json;

/// Finite doubles as numbers, infinities as the strings "inf" and "-inf".
Json json_number(double x);
double json_to_double(const Json& j);

// MDP documents. Keys are emitted in sorted order and doubles in shortest
// round-trip form, so save(load(save(m))) == save(m) byte for byte.
Json mdp_to_json(const LayeredMDP& mdp);
LayeredMDP mdp_from_json(const Json& doc);
std::string canonical_mdp(const LayeredMDP& mdp);
/// Digest of the canonical serialization.
std::string mdp_hash(const LayeredMDP& mdp);
void save_mdp(const std::filesystem::path& path, const LayeredMDP& mdp);
LayeredMDP load_mdp(const std::filesystem::path& path);

/// {kind, alpha, q?, pi_ref: "uniform" | rows}.
Json regularizer_to_json(const Regularizer& reg);
Regularizer regularizer_from_json(const Json& doc);

/// Members as per-state rows: {"members": [{"name", "values": [[...], ...]}]}.
Json function_class_to_json(const LayeredMDP& shape, const FunctionClass& fc);
FunctionClass function_class_from_json(const LayeredMDP& shape, const Json& doc);

Json confidence_set_to_json(const ConfidenceSet& conf, const FunctionClass& fc);
Json diagnostics_to_json(const DecisionDiagnostics& diag);

/// Table as per-state rows, the layout used for policies and weights.
Json table_to_json(const LayeredMDP& shape, const SATable& t);
SATable table_from_json(const LayeredMDP& shape, const Json& doc);

/// Dataset file: one JSON header line {n, seed, mu, mdp_hash}, then one
/// "s,a,r,next" record per line in sampling order.
void write_dataset(const std::filesystem::path& path, const OfflineDataset& data);
OfflineDataset read_dataset(const std::filesystem::path& path);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& field);
std::string csv_row(const std::vector<std::string>& fields);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row);
  std::string str() const;
  void write(const std::filesystem::path& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  /// Optional symmetric error bars.
  std::vector<double> err;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
};

std::string svg_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace offrl
