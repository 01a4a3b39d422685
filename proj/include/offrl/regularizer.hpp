#pragma once

#include <span>
#include <string>
#include <vector>

#include "offrl/common.hpp"

namespace offrl {

enum class RegKind { None, Shannon, Tsallis, LogBarrier };

std::string to_string(RegKind kind);
RegKind reg_kind_from_string(const std::string& name);

/// psi(p; s) = alpha * Breg_Phi(p, pi_ref(.|s)).
///
/// `pi_ref` holds one row per state. An empty table means the uniform
/// reference over however many actions the state has.
struct Regularizer {
  RegKind kind = RegKind::None;
  double alpha = 0.0;
  double tsallis_q = 0.5;
  std::vector<std::vector<double>> pi_ref;

  static Regularizer none();
  static Regularizer shannon(double alpha);
  static Regularizer tsallis(double alpha, double q);
  static Regularizer log_barrier(double alpha);

  /// True when psi is identically zero (kind none or alpha = 0).
  bool inactive() const { return kind == RegKind::None || alpha == 0.0; }

  double ref_prob(int s, int a, int num_actions) const;
  void reference(int s, std::span<double> out) const;

  /// Appends invariant violations to `findings`.
  void validate(std::vector<std::string>& findings) const;
};

struct RegularizerConstants {
  double c1 = 0.0;
  double c2 = 0.0;
};

struct ArgmaxResult {
  std::vector<double> p;
  double value = 0.0;
  /// Normalization multiplier (0 for the closed-form kinds).
  double multiplier = 0.0;
  int iterations = 0;
  /// Spread of q - grad psi(p) across actions plus |sum p - 1|.
  double residual = 0.0;
};

/// Convex potential Phi and its gradient (kind none has Phi = 0).
double phi_value(RegKind kind, double tsallis_q, std::span<const double> p);
void phi_gradient(RegKind kind, double tsallis_q, std::span<const double> p,
                  std::span<double> out);

double kl_divergence(std::span<const double> x, std::span<const double> y);

double psi_value(const Regularizer& reg, std::span<const double> p, int s);
void psi_gradient(const Regularizer& reg, std::span<const double> p, int s,
                  std::span<double> out);

/// Breg_psi(x, y; s) = alpha * Breg_Phi(x, y). The reference policy cancels.
double bregman(const Regularizer& reg, std::span<const double> x,
               std::span<const double> y, int s);

/// argmax_p <p, q> - psi(p; s) over the simplex.
ArgmaxResult regularized_argmax(const Regularizer& reg, std::span<const double> q, int s);

/// Value of the regularized maximization only; cheaper for kind none.
double regularized_value(const Regularizer& reg, std::span<const double> q, int s);

/// max_a |(q - grad psi(p))_a - mean| plus |sum p - 1|.
double stationarity_residual(const Regularizer& reg, std::span<const double> p,
                             std::span<const double> q, int s);

/// Constants C1, C2 for a horizon h. Throws DomainError for kind none.
RegularizerConstants psi_constants(const Regularizer& reg, int h);

}  // namespace offrl
