#include "offrl/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace offrl {

namespace {

constexpr int kMaxBisection = 200;
constexpr double kNormTolerance = 1e-12;

void require_distribution(std::span<const double> p, const char* what) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw DomainError(std::string(what) + ": entries must be finite and nonnegative");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DomainError(std::string(what) + ": entries must sum to 1");
  }
}

// Per-coordinate Bregman term of Phi at (x, y), both already validated.
double breg_term(RegKind kind, double q, double x, double y) {
  switch (kind) {
    case RegKind::Shannon:
      return (x > 0.0 ? x * std::log(x / y) : 0.0) - x + y;
    case RegKind::Tsallis: {
      const double t = x / y;
      return std::pow(y, q) * (1.0 + q * (t - 1.0) - std::pow(t, q)) / (1.0 - q);
    }
    case RegKind::LogBarrier: {
      const double t = x / y;
      return t - 1.0 - std::log(t);
    }
    case RegKind::None:
      break;
  }
  return 0.0;
}

// Candidate maximizer coordinate for multiplier lambda; the normalization
// sum is increasing in lambda and diverges at the pole.
struct KktCoordinate {
  RegKind kind;
  double alpha;
  double q;

  double prob(double ref, double lambda, double value) const {
    if (kind == RegKind::LogBarrier) {
      return ref / (1.0 - ref * (lambda + value) / alpha);
    }
    const double kappa = alpha * q / (1.0 - q);
    const double base = std::pow(ref, q - 1.0) - (lambda + value) / kappa;
    return std::pow(base, 1.0 / (q - 1.0));
  }

  // Smallest lambda at which some coordinate blows up.
  double pole(double ref, double value) const {
    if (kind == RegKind::LogBarrier) return alpha / ref - value;
    const double kappa = alpha * q / (1.0 - q);
    return kappa * std::pow(ref, q - 1.0) - value;
  }
};

}  // namespace

std::string to_string(RegKind kind) {
  switch (kind) {
    case RegKind::None:
      return "none";
    case RegKind::Shannon:
      return "shannon";
    case RegKind::Tsallis:
      return "tsallis";
    case RegKind::LogBarrier:
      return "log_barrier";
  }
  return "none";
}

RegKind reg_kind_from_string(const std::string& name) {
  if (name == "none") return RegKind::None;
  if (name == "shannon") return RegKind::Shannon;
  if (name == "tsallis") return RegKind::Tsallis;
  if (name == "log_barrier") return RegKind::LogBarrier;
  throw DomainError("unknown regularizer kind '" + name + "'");
}

Regularizer Regularizer::none() { return {}; }

Regularizer Regularizer::shannon(double alpha) {
  Regularizer r;
  r.kind = RegKind::Shannon;
  r.alpha = alpha;
  return r;
}

Regularizer Regularizer::tsallis(double alpha, double q) {
  Regularizer r;
  r.kind = RegKind::Tsallis;
  r.alpha = alpha;
  r.tsallis_q = q;
  return r;
}

Regularizer Regularizer::log_barrier(double alpha) {
  Regularizer r;
  r.kind = RegKind::LogBarrier;
  r.alpha = alpha;
  return r;
}

double Regularizer::ref_prob(int s, int a, int num_actions) const {
  if (pi_ref.empty()) return 1.0 / num_actions;
  return pi_ref.at(static_cast<std::size_t>(s)).at(static_cast<std::size_t>(a));
}

void Regularizer::reference(int s, std::span<double> out) const {
  const int n = static_cast<int>(out.size());
  for (int a = 0; a < n; ++a) out[a] = ref_prob(s, a, n);
}

void Regularizer::validate(std::vector<std::string>& findings) const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    findings.push_back("regularizer: alpha must be finite and >= 0");
  }
  if (kind == RegKind::Tsallis && !(tsallis_q > 0.0 && tsallis_q < 1.0)) {
    findings.push_back("regularizer: tsallis q must lie in (0, 1)");
  }
  for (std::size_t s = 0; s < pi_ref.size(); ++s) {
    double sum = 0.0;
    for (std::size_t a = 0; a < pi_ref[s].size(); ++a) {
      const double x = pi_ref[s][a];
      if (kind != RegKind::None && !(x > 0.0)) {
        findings.push_back("regularizer: pi_ref(" + std::to_string(a) + "|" + std::to_string(s) +
                           ") must be strictly positive");
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      findings.push_back("regularizer: pi_ref row " + std::to_string(s) + " sums to " +
                         format_double(sum));
    }
  }
}

double phi_value(RegKind kind, double q, std::span<const double> p) {
  double total = 0.0;
  switch (kind) {
    case RegKind::None:
      return 0.0;
    case RegKind::Shannon:
      for (double x : p) total += x > 0.0 ? x * std::log(x) : 0.0;
      return total;
    case RegKind::Tsallis:
      for (double x : p) total += std::pow(x, q);
      return (1.0 - total) / (1.0 - q);
    case RegKind::LogBarrier:
      for (double x : p) {
        if (!(x > 0.0)) throw DomainError("log-barrier potential needs positive entries");
        total -= std::log(x);
      }
      return total;
  }
  return 0.0;
}

void phi_gradient(RegKind kind, double q, std::span<const double> p, std::span<double> out) {
  for (std::size_t a = 0; a < p.size(); ++a) {
    const double x = p[a];
    switch (kind) {
      case RegKind::None:
        out[a] = 0.0;
        break;
      case RegKind::Shannon:
        out[a] = std::log(x) + 1.0;
        break;
      case RegKind::Tsallis:
        out[a] = -q * std::pow(x, q - 1.0) / (1.0 - q);
        break;
      case RegKind::LogBarrier:
        out[a] = -1.0 / x;
        break;
    }
  }
}

double kl_divergence(std::span<const double> x, std::span<const double> y) {
  double total = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    if (x[a] <= 0.0) continue;
    if (y[a] <= 0.0) return kUnbounded;
    total += x[a] * std::log(x[a] / y[a]);
  }
  return std::max(total, 0.0);
}

double bregman(const Regularizer& reg, std::span<const double> x, std::span<const double> y,
               int /*s*/) {
  if (x.size() != y.size()) throw DomainError("bregman: size mismatch");
  if (reg.inactive()) return 0.0;
  require_distribution(x, "bregman x");
  require_distribution(y, "bregman y");
  double total = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    if (!(y[a] > 0.0)) throw DomainError("bregman: second argument must be interior");
    if (reg.kind == RegKind::LogBarrier && !(x[a] > 0.0)) {
      throw DomainError("bregman: log-barrier needs strictly positive entries");
    }
    total += breg_term(reg.kind, reg.tsallis_q, x[a], y[a]);
  }
  return reg.alpha * std::max(total, 0.0);
}

double psi_value(const Regularizer& reg, std::span<const double> p, int s) {
  if (reg.inactive()) return 0.0;
  std::vector<double> ref(p.size());
  reg.reference(s, ref);
  return bregman(reg, p, ref, s);
}

void psi_gradient(const Regularizer& reg, std::span<const double> p, int s,
                  std::span<double> out) {
  if (reg.inactive()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  std::vector<double> ref(p.size());
  std::vector<double> gref(p.size());
  reg.reference(s, ref);
  phi_gradient(reg.kind, reg.tsallis_q, p, out);
  phi_gradient(reg.kind, reg.tsallis_q, ref, gref);
  for (std::size_t a = 0; a < p.size(); ++a) out[a] = reg.alpha * (out[a] - gref[a]);
}

double stationarity_residual(const Regularizer& reg, std::span<const double> p,
                             std::span<const double> q, int s) {
  double sum = 0.0;
  for (double x : p) sum += x;
  if (reg.inactive()) {
    const double best = *std::max_element(q.begin(), q.end());
    double got = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) got += p[a] * q[a];
    return (best - got) + std::abs(sum - 1.0);
  }
  std::vector<double> grad(p.size());
  psi_gradient(reg, p, s, grad);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t a = 0; a < p.size(); ++a) {
    const double r = q[a] - grad[a];
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return (hi - lo) + std::abs(sum - 1.0);
}

ArgmaxResult regularized_argmax(const Regularizer& reg, std::span<const double> q, int s) {
  const int n = static_cast<int>(q.size());
  if (n == 0) throw DomainError("regularized_argmax: empty action set");
  for (double x : q) {
    if (!std::isfinite(x)) throw DomainError("regularized_argmax: non-finite payoff");
  }
  ArgmaxResult out;
  out.p.assign(static_cast<std::size_t>(n), 0.0);

  if (n == 1) {
    out.p[0] = 1.0;
    out.value = q[0];
    return out;
  }

  if (reg.inactive()) {
    int best = 0;
    for (int a = 1; a < n; ++a) {
      if (q[a] > q[best]) best = a;
    }
    out.p[best] = 1.0;
    out.value = q[best];
    return out;
  }

  std::vector<double> ref(static_cast<std::size_t>(n));
  reg.reference(s, ref);

  if (reg.kind == RegKind::Shannon) {
    // p ∝ ref * exp(q / alpha), shifted by the largest exponent.
    std::vector<double> z(static_cast<std::size_t>(n));
    double zmax = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      z[a] = std::log(ref[a]) + q[a] / reg.alpha;
      zmax = std::max(zmax, z[a]);
    }
    double total = 0.0;
    for (int a = 0; a < n; ++a) {
      out.p[a] = std::exp(z[a] - zmax);
      total += out.p[a];
    }
    for (double& x : out.p) x /= total;
    out.value = reg.alpha * (zmax + std::log(total));
    out.residual = stationarity_residual(reg, out.p, q, s);
    return out;
  }

  const KktCoordinate coord{reg.kind, reg.alpha, reg.tsallis_q};
  double qmin = q[0];
  double qmax = q[0];
  double pole = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    qmin = std::min(qmin, q[a]);
    qmax = std::max(qmax, q[a]);
    pole = std::min(pole, coord.pole(ref[a], q[a]));
  }

  auto total_at = [&](double lambda) {
    double total = 0.0;
    for (int a = 0; a < n; ++a) total += coord.prob(ref[a], lambda, q[a]);
    return total;
  };

  // At lambda = -max q every coordinate is at most its reference mass, at
  // lambda = -min q at least; the sum diverges at the pole.
  double lo = -qmax;
  double hi = std::min(-qmin, pole);
  if (!(total_at(lo) <= 1.0 + kNormTolerance)) {
    std::ostringstream msg;
    msg << "regularized_argmax: bracket failure at state " << s << " (lower end sum "
        << total_at(lo) << ")";
    throw SolverError(msg.str());
  }
  int it = 0;
  for (; it < kMaxBisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double t = total_at(mid);
    if (t < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Either end of the final bracket is within one ulp of the root; keep the
  // one whose sum is closer to 1 (hi may sit on the pole).
  double lambda = lo;
  if (hi < pole) {
    const double tl = std::abs(total_at(lo) - 1.0);
    const double th = std::abs(total_at(hi) - 1.0);
    if (th < tl) lambda = hi;
  }
  double total = 0.0;
  for (int a = 0; a < n; ++a) {
    out.p[a] = coord.prob(ref[a], lambda, q[a]);
    total += out.p[a];
  }
  if (!(std::abs(total - 1.0) <= kNormTolerance) || !std::isfinite(total)) {
    std::ostringstream msg;
    msg << "regularized_argmax: no convergence at state " << s << " after " << it
        << " iterations (lambda " << lambda << ", normalization " << total << ")";
    throw SolverError(msg.str());
  }
  for (double& x : out.p) x /= total;
  out.multiplier = lambda;
  out.iterations = it;
  double inner = 0.0;
  for (int a = 0; a < n; ++a) inner += out.p[a] * q[a];
  out.value = inner - psi_value(reg, out.p, s);
  out.residual = stationarity_residual(reg, out.p, q, s);
  return out;
}

double regularized_value(const Regularizer& reg, std::span<const double> q, int s) {
  if (q.size() == 1) return q[0];
  if (reg.inactive()) return *std::max_element(q.begin(), q.end());
  return regularized_argmax(reg, q, s).value;
}

RegularizerConstants psi_constants(const Regularizer& reg, int h) {
  const double H = h;
  const double a = reg.alpha;
  if (!(a > 0.0)) throw DomainError("psi_constants: alpha must be positive");
  switch (reg.kind) {
    case RegKind::Shannon:
      return {1.0 + 4.0 * H / a, 1.0 / a};
    case RegKind::Tsallis: {
      const double q = reg.tsallis_q;
      const double base = 1.0 + 2.0 * H * (1.0 - q) / (a * q);
      return {std::pow(base, (2.0 - q) / (1.0 - q)), 1.0 / (a * q)};
    }
    case RegKind::LogBarrier:
      return {1.0 + 2.0 * H / a, 2.0 / a};
    case RegKind::None:
      break;
  }
  throw DomainError("psi_constants: undefined for kind none");
}

}  // namespace offrl
