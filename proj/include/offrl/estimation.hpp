#pragma once

#include <string>
#include <vector>

#include "offrl/data.hpp"
#include "offrl/mdp.hpp"

namespace offrl {

struct FunctionClass {
  std::vector<QFunction> members;
  std::vector<std::string> names;

  std::size_t size() const { return members.size(); }
  void add(QFunction f, std::string name);
  /// Index of the member named `name`, or -1.
  int find(const std::string& name) const;
};

struct WeightClass {
  std::vector<SATable> members;
  std::vector<std::string> names;
  double b_w = 1.0;

  std::size_t size() const { return members.size(); }
};

enum class ConfMethod { BC, WR, BR };

std::string to_string(ConfMethod m);

struct ConfidenceSet {
  ConfMethod method = ConfMethod::BC;
  double delta = 0.1;
  double eps_stat = 0.0;
  /// Included member indices, ascending.
  std::vector<int> indices;
  /// Test statistic of every member, aligned with the function class.
  std::vector<double> losses;

  bool contains(int i) const;
};

/// Thresholds, natural logarithms throughout.
double eps_bc(int horizon, std::size_t nf, std::size_t ng, double delta, std::size_t n);
double eps_wr(double b_w, int horizon, std::size_t nf, std::size_t nw, double delta, std::size_t n);
double eps_br(int horizon, std::size_t nf, double delta, std::size_t n);

/// Lazily computed regularized state values f(s).
class ValueCache {
 public:
  ValueCache(const LayeredMDP& mdp, const Regularizer& reg, const QFunction& f);
  /// f(s'), with 0 for the terminal marker -1.
  double operator()(int s);

 private:
  const LayeredMDP& mdp_;
  const Regularizer& reg_;
  const QFunction& f_;
  std::vector<double> v_;
  std::vector<char> done_;
};

/// Mean of (g(s,a) - r - f(s'))^2.
double loss_bc(const LayeredMDP& mdp, const OfflineDataset& data, const QFunction& g,
               const QFunction& f, const Regularizer& reg);
/// Keeps f iff L(f,f) - min_g L(g,f) <= eps_bc.
ConfidenceSet build_conf_bc(const LayeredMDP& mdp, const OfflineDataset& data,
                            const FunctionClass& fclass, const FunctionClass& gclass,
                            const Regularizer& reg, double delta);

/// |mean of w(s,a) (f(s,a) - r - f(s'))|.
double loss_wr(const LayeredMDP& mdp, const OfflineDataset& data, const SATable& w,
               const QFunction& f, const Regularizer& reg);
/// Keeps f iff max_w L(w,f) <= eps_wr.
ConfidenceSet build_conf_wr(const LayeredMDP& mdp, const OfflineDataset& data,
                            const FunctionClass& fclass, const WeightClass& wclass,
                            const Regularizer& reg, double delta);

/// Mean product of the two slots' residuals.
double loss_br(const LayeredMDP& mdp, const DoubleSampleDataset& pairs, const QFunction& f,
               const Regularizer& reg);
/// Keeps f iff L_br(f) <= eps_br.
ConfidenceSet build_conf_br(const LayeredMDP& mdp, const DoubleSampleDataset& pairs,
                            const FunctionClass& fclass, const Regularizer& reg, double delta);

/// Confidence set holding every member (no statistical test).
ConfidenceSet full_confidence_set(const FunctionClass& fclass);

/// For each f, the index of a g with |T f - g| <= tol everywhere, or -1.
std::vector<int> completion_map(const LayeredMDP& mdp, const Regularizer& reg,
                                const FunctionClass& fclass, const FunctionClass& gclass,
                                double tol = 1e-9);
bool verify_completeness(const LayeredMDP& mdp, const Regularizer& reg,
                         const FunctionClass& fclass, const FunctionClass& gclass,
                         double tol = 1e-9);

std::vector<std::string> validate_function_class(const LayeredMDP& mdp, const FunctionClass& fc);

}  // namespace offrl
