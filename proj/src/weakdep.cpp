#include "supou/weakdep.hpp"

#include <cmath>
#include <utility>

#include "supou/analytics.hpp"
#include "supou/errors.hpp"
#include "supou/quad.hpp"

namespace supou {

namespace {

// Relative floor passed alongside every absolute tolerance so that large
// intermediate integrals (slow mixing components near a = 0) do not stall the
// adaptive rule; the mixing weight scales their absolute contribution down.
constexpr double kRelFloor = 1e-10;

// Which functional of the kernel value enters the window integral.
enum class Functional { square, linear, absolute };

double apply_functional(double v, Functional fn) {
  switch (fn) {
    case Functional::square:
      return v * v;
    case Functional::linear:
      return v;
    case Functional::absolute:
      return std::abs(v);
  }
  return 0.0;
}

// Integral of fn(f(a, u)) over the half-line window u > bound (upper_tail)
// or u < bound.
double inner_window_integral(const KernelSpec& kernel, double a, bool upper_tail, double bound,
                             Functional fn, double abs_tol) {
  auto integrand = [&kernel, a, fn](double u) { return apply_functional(kernel.f(a, u), fn); };
  return upper_tail ? quad::integrate_upper(integrand, bound, abs_tol, kRelFloor)
                    : quad::integrate_lower(integrand, bound, abs_tol, kRelFloor);
}

// Double integral over the mixing law and one half-line window. The mixing
// density integrates to one, so an inner budget of quad_tol/10 plus an outer
// budget of 9 quad_tol/10 keeps the total within quad_tol.
double mixed_window_integral(const KernelSpec& kernel, bool upper_tail, double bound,
                             Functional fn, double quad_tol) {
  auto outer = [&](double a) {
    const double weight = a < 0.0 ? kernel.pi_density(a) : 0.0;
    if (weight == 0.0) return 0.0;
    return weight * inner_window_integral(kernel, a, upper_tail, bound, fn, 0.1 * quad_tol);
  };
  const double value = quad::integrate_lower(outer, 0.0, 0.9 * quad_tol, kRelFloor);
  require(std::isfinite(value), errc::numeric,
          "coefficient quadrature produced a non-finite value");
  return value;
}

// Window integrals of squares and absolute values are integrals of
// nonnegative integrands; a genuinely negative result signals an invalid
// kernel or mixing density rather than roundoff.
double checked_nonnegative(double value, double quad_tol) {
  require(value >= -std::max(100.0 * quad_tol, 1e-12), errc::numeric,
          "negative intermediate value in weak-dependence quadrature; kernel specification is "
          "inconsistent");
  return std::max(value, 0.0);
}

// Coefficient contribution of one half-line window under the declared case.
// Second-moment cases return the square-rooted block; the finite-variation
// case returns its additive term directly.
double window_term(const KernelSpec& kernel, bool upper_tail, double bound, double quad_tol) {
  switch (kernel.integrability) {
    case MmaCase::zero_mean: {
      const double sq = checked_nonnegative(
          mixed_window_integral(kernel, upper_tail, bound, Functional::square, quad_tol),
          quad_tol);
      return std::sqrt(kernel.sigma_L * sq);
    }
    case MmaCase::general: {
      const double sq = checked_nonnegative(
          mixed_window_integral(kernel, upper_tail, bound, Functional::square, quad_tol),
          quad_tol);
      const double lin =
          mixed_window_integral(kernel, upper_tail, bound, Functional::linear, quad_tol);
      const double mean_part = kernel.mu_L * lin;
      return std::sqrt(kernel.sigma_L * sq + mean_part * mean_part);
    }
    case MmaCase::finite_variation: {
      const double abs = checked_nonnegative(
          mixed_window_integral(kernel, upper_tail, bound, Functional::absolute, quad_tol),
          quad_tol);
      return (kernel.nu_abs + kernel.gamma0) * abs;
    }
  }
  fail(errc::contract, "unknown integrability case");
}

void check_radius_grid(const std::vector<double>& radii, double min_radius) {
  require(!radii.empty(), errc::contract, "radius grid must be nonempty");
  double prev = min_radius - 1.0;
  for (double r : radii) {
    require(std::isfinite(r) && r >= min_radius, errc::contract,
            "radius grid entries must be finite and within the variant's domain");
    require(r > prev, errc::contract, "radius grid must be strictly increasing");
    prev = r;
  }
}

// Verifies the curve invariants (nonnegative, nonincreasing) up to the
// quadrature slack and returns the assembled curve.
CoefficientCurve finish_curve(std::string variant, std::vector<std::pair<double, double>> points,
                              double quad_tol) {
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, std::abs(p.second));
  const double slack = 2.0 * quad_tol + 1e-10 * (1.0 + scale);
  for (std::size_t i = 0; i < points.size(); ++i) {
    require(points[i].second >= -slack, errc::numeric, "coefficient curve has a negative value");
    if (i > 0) {
      require(points[i].second <= points[i - 1].second + slack, errc::numeric,
              "coefficient curve is not nonincreasing");
    }
  }
  CoefficientCurve curve;
  curve.variant = std::move(variant);
  curve.points = std::move(points);
  curve.quad_tol = quad_tol;
  return curve;
}

struct GateEntry {
  const char* id;
  double (*threshold)(double);
};

// Decay thresholds indexed by theorem id; delta is the moment surplus.
const GateEntry kGateCatalog[] = {
    {"clt_mean", [](double d) { return 4.0 + 2.0 / d; }},
    {"clt_mean2", [](double d) { return 1.0 + 1.0 / d; }},
    {"clt_cova_eta", [](double d) { return (4.0 + 2.0 / d) * (3.0 + d) / (2.0 + d); }},
    {"clt_cova_theta", [](double d) { return (1.0 + 1.0 / d) * (3.0 + d) / (2.0 + d); }},
    {"clt_mean_ret", [](double d) { return 2.0 * (1.0 + 1.0 / d); }},
    {"clt_multi_acf_ret", [](double d) { return (1.0 + 1.0 / d) * (2.0 + 2.0 * d) / d; }},
    {"clt_multi_4_ret", [](double d) { return (1.0 + 1.0 / d) * (6.0 + 2.0 * d) / d; }},
    {"asy_mom1", [](double d) { return (1.0 + 1.0 / d) * (6.0 + 2.0 * d) / (2.0 + d); }},
    {"asy_mom2", [](double d) { return (1.0 + 1.0 / d) * (3.0 + d) / (2.0 + d); }},
    {"asy_mom3", [](double d) { return (1.0 + 1.0 / d) * (6.0 + 2.0 * d) / d; }},
};

}  // namespace

const char* to_string(MmaCase c) {
  switch (c) {
    case MmaCase::zero_mean:
      return "zero_mean";
    case MmaCase::general:
      return "general";
    case MmaCase::finite_variation:
      return "finite_variation";
  }
  return "unknown";
}

const char* to_string(CoeffKind k) { return k == CoeffKind::eta ? "eta" : "theta"; }

const char* to_string(SupouThetaVariant v) {
  switch (v) {
    case SupouThetaVariant::zero_mean:
      return "zero_mean";
    case SupouThetaVariant::general:
      return "general";
    case SupouThetaVariant::subordinator_linf:
      return "subordinator_linf";
    case SupouThetaVariant::subordinator_l2:
      return "subordinator_l2";
  }
  return "unknown";
}

void KernelSpec::validate() const {
  require(static_cast<bool>(f), errc::contract, "kernel evaluator is required");
  require(static_cast<bool>(pi_density), errc::contract, "mixing density is required");
  require(std::isfinite(sigma_L) && sigma_L >= 0.0, errc::contract,
          "sigma_L must be finite and nonnegative");
  require(std::isfinite(mu_L), errc::contract, "mu_L must be finite");
  require(std::isfinite(nu_abs) && nu_abs >= 0.0, errc::contract,
          "nu_abs must be finite and nonnegative");
  require(std::isfinite(gamma0) && gamma0 >= 0.0, errc::contract,
          "gamma0 must be finite and nonnegative");
  switch (integrability) {
    case MmaCase::zero_mean:
      require(mu_L == 0.0, errc::contract,
              "zero-mean case requires mu_L == 0; declare the general case instead");
      require(sigma_L > 0.0, errc::contract, "zero-mean case requires sigma_L > 0");
      break;
    case MmaCase::general:
      require(sigma_L > 0.0, errc::contract, "general case requires sigma_L > 0");
      break;
    case MmaCase::finite_variation:
      require(nu_abs + gamma0 > 0.0, errc::contract,
              "finite-variation case requires nu_abs + gamma0 > 0");
      require(std::abs(mu_L) <= nu_abs + gamma0 + 1e-12 * (1.0 + std::abs(mu_L)), errc::contract,
              "finite-variation case requires |mu_L| <= gamma0 + nu_abs");
      break;
  }
}

double theta_coeff_supou(const ThetaParams& theta, double r, SupouThetaVariant variant) {
  theta.validate();
  require(std::isfinite(r) && r >= 0.0, errc::contract, "radius must be nonnegative");
  switch (variant) {
    case SupouThetaVariant::zero_mean:
      require(theta.mu == 0.0, errc::contract,
              "zero_mean variant requires mu == 0; use the general variant instead");
      return std::sqrt(supou_autocov(theta, 2.0 * r));
    case SupouThetaVariant::general: {
      const double block = supou_autocov(theta, 2.0 * r);
      const double mean_part = 2.0 * theta.mu / theta.sigma2 * supou_autocov(theta, r);
      return std::sqrt(block + mean_part * mean_part);
    }
    case SupouThetaVariant::subordinator_linf:
      require(theta.mu > 0.0, errc::contract, "subordinator variants require mu > 0");
      return -theta.mu * std::pow(1.0 - theta.B * r, 1.0 - theta.alpha_pi) /
             (theta.B * (theta.alpha_pi - 1.0));
    case SupouThetaVariant::subordinator_l2:
      require(theta.mu > 0.0, errc::contract, "subordinator variants require mu > 0");
      return 2.0 * theta.mu / theta.sigma2 * supou_autocov(theta, r);
  }
  fail(errc::contract, "unknown supOU theta variant");
}

double theta_coeff_returns(const ThetaParams& theta, double delta, double r) {
  theta.validate();
  require(delta > 0.0, errc::contract, "delta must be positive");
  require(theta.mu > 0.0, errc::contract, "subordinator variants require mu > 0");
  require(std::isfinite(r) && r >= 1.0, errc::contract,
          "return-series radius must be at least 1");
  const double base =
      theta_coeff_supou(theta, (r - 1.0) * delta, SupouThetaVariant::subordinator_linf);
  return std::sqrt(delta * base);
}

double coeff_generic_mma(const KernelSpec& kernel, double r, CoeffKind kind, double quad_tol) {
  kernel.validate();
  require(std::isfinite(r) && r >= 0.0, errc::contract, "radius must be nonnegative");
  require(std::isfinite(quad_tol) && quad_tol > 0.0, errc::contract, "quad_tol must be positive");
  // Theta windows truncate the past at s < -r; a causal kernel makes the eta
  // coefficient expressible by the same truncation, so it is taken equal.
  if (kind == CoeffKind::theta || kernel.causal) {
    return window_term(kernel, true, r, quad_tol);
  }
  // Eta windows halve the radius: the indicators act on 2s, splitting into
  // the past block u > r/2 and the future block u < -r/2 in kernel time.
  const double past = window_term(kernel, true, 0.5 * r, quad_tol);
  const double future = window_term(kernel, false, -0.5 * r, quad_tol);
  return past + future;
}

KernelSpec make_supou_kernel(const ThetaParams& theta, MmaCase integrability) {
  theta.validate();
  if (integrability != MmaCase::zero_mean) {
    require(theta.mu > 0.0, errc::contract,
            "noncentered supOU kernels describe a subordinator basis and require mu > 0");
  }
  const double B = theta.B;
  const double alpha = theta.alpha_pi;
  const double log_norm = std::lgamma(alpha) + std::log(-B);
  KernelSpec kernel;
  kernel.f = [](double a, double u) { return u >= 0.0 ? std::exp(a * u) : 0.0; };
  kernel.pi_density = [B, alpha, log_norm](double a) {
    if (a >= 0.0) return 0.0;
    const double x = a / B;
    return std::exp((alpha - 1.0) * std::log(x) - x - log_norm);
  };
  kernel.pi_sampler = [B, alpha](Rng& rng) { return B * rng.gamma(alpha, 1.0); };
  kernel.sigma_L = theta.sigma2;
  kernel.causal = true;
  kernel.integrability = integrability;
  if (integrability == MmaCase::zero_mean) {
    kernel.mu_L = 0.0;
    kernel.nu_abs = 0.0;
    kernel.gamma0 = 0.0;
  } else {
    kernel.mu_L = theta.mu;
    kernel.nu_abs = theta.mu;
    kernel.gamma0 = 0.0;
  }
  kernel.validate();
  return kernel;
}

GateResult clt_gate(const std::string& theorem, double delta_moment, double decay_exponent) {
  require(std::isfinite(delta_moment) && delta_moment > 0.0, errc::contract,
          "delta_moment must be positive");
  require(std::isfinite(decay_exponent), errc::contract, "decay_exponent must be finite");
  for (const auto& entry : kGateCatalog) {
    if (theorem == entry.id) {
      GateResult result;
      result.theorem = theorem;
      result.delta_moment = delta_moment;
      result.threshold = entry.threshold(delta_moment);
      result.decay_exponent = decay_exponent;
      result.pass = decay_exponent > result.threshold;
      return result;
    }
  }
  std::string known;
  for (const auto& entry : kGateCatalog) {
    if (!known.empty()) known += ", ";
    known += entry.id;
  }
  fail(errc::contract, "unknown theorem id '" + theorem + "'; known ids: " + known);
}

const std::vector<std::string>& clt_gate_catalog() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& entry : kGateCatalog) v.emplace_back(entry.id);
    return v;
  }();
  return ids;
}

CoefficientCurve coefficient_curve_supou(const ThetaParams& theta, SupouThetaVariant variant,
                                         const std::vector<double>& radii) {
  check_radius_grid(radii, 0.0);
  std::vector<std::pair<double, double>> points;
  points.reserve(radii.size());
  for (double r : radii) points.emplace_back(r, theta_coeff_supou(theta, r, variant));
  return finish_curve(std::string("supou_theta_") + to_string(variant), std::move(points), 0.0);
}

CoefficientCurve coefficient_curve_returns(const ThetaParams& theta, double delta,
                                           const std::vector<double>& radii) {
  check_radius_grid(radii, 1.0);
  std::vector<std::pair<double, double>> points;
  points.reserve(radii.size());
  for (double r : radii) points.emplace_back(r, theta_coeff_returns(theta, delta, r));
  return finish_curve("returns_theta", std::move(points), 0.0);
}

CoefficientCurve coefficient_curve_generic(const KernelSpec& kernel, CoeffKind kind,
                                           const std::vector<double>& radii, double quad_tol) {
  check_radius_grid(radii, 0.0);
  std::vector<std::pair<double, double>> points;
  points.reserve(radii.size());
  for (double r : radii) points.emplace_back(r, coeff_generic_mma(kernel, r, kind, quad_tol));
  return finish_curve(std::string("generic_") + to_string(kind), std::move(points), quad_tol);
}

double loglog_slope(const CoefficientCurve& curve) {
  std::vector<std::pair<double, double>> logs;
  for (const auto& p : curve.points) {
    if (p.first > 0.0 && p.second > 0.0) logs.emplace_back(std::log(p.first), std::log(p.second));
  }
  require(logs.size() >= 2, errc::contract,
          "log-log slope needs at least two points with positive radius and coefficient");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : logs) {
    mx += p.first;
    my += p.second;
  }
  mx /= static_cast<double>(logs.size());
  my /= static_cast<double>(logs.size());
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : logs) {
    sxx += (p.first - mx) * (p.first - mx);
    sxy += (p.first - mx) * (p.second - my);
  }
  require(sxx > 0.0, errc::contract, "log-log slope needs distinct radii");
  return sxy / sxx;
}

}  // namespace supou
