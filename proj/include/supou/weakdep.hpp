#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "supou/levy.hpp"
#include "supou/rng.hpp"

namespace supou {

// Declared integrability regime of a mixed moving average kernel; selects
// which coefficient formula applies and which summary fields are consulted.
enum class MmaCase { zero_mean, general, finite_variation };

// Weak-dependence flavor: eta coefficients bound covariances between past and
// future blocks on both sides, theta coefficients bound the influence of the
// whole past on Lipschitz functionals of the future.
enum class CoeffKind { eta, theta };

// Closed-form supOU theta-coefficient variants: centered basis, general basis
// (adds the squared mean window), and the two subordinator bounds (L-infinity
// and L2 truncation distance).
enum class SupouThetaVariant { zero_mean, general, subordinator_linf, subordinator_l2 };

const char* to_string(MmaCase c);
const char* to_string(CoeffKind k);
const char* to_string(SupouThetaVariant v);

// Scalar mixed moving average kernel X_t = int int f(A, t - s) Lambda(dA, ds)
// described by the kernel evaluator, the mixing density over A < 0, and the
// summary statistics of the driving Levy basis.
struct KernelSpec {
  std::function<double(double a, double u)> f;  // kernel value f(a, u)
  std::function<double(double a)> pi_density;   // mixing density on a < 0
  std::function<double(Rng&)> pi_sampler;       // optional sampler for the mixing law
  double sigma_L = 0.0;  // Gaussian variance plus int x^2 nu(dx): Var(L_1)
  double mu_L = 0.0;     // mean of L_1
  double nu_abs = 0.0;   // int |x| nu(dx), used by the finite-variation case
  double gamma0 = 0.0;   // drift after removing the small-jump truncation term
  bool causal = true;    // kernel vanishes for negative time arguments
  MmaCase integrability = MmaCase::zero_mean;

  // Checks that the declared case is consistent with the supplied summaries.
  void validate() const;
};

// One evaluated coefficient curve: a variant tag plus (radius, coefficient)
// pairs, nonnegative and nonincreasing in the radius.
struct CoefficientCurve {
  std::string variant;
  std::vector<std::pair<double, double>> points;
  double quad_tol = 0.0;
};

// Limit-theorem gate verdict: the exact decay threshold for the requested
// theorem at the supplied moment surplus, and whether the decay exponent
// clears it strictly.
struct GateResult {
  std::string theorem;
  double delta_moment = 0.0;
  double threshold = 0.0;
  double decay_exponent = 0.0;
  bool pass = false;
};

// Theta coefficient of the supOU process at radius r >= 0:
// zero_mean -> sqrt(Cov(X_0, X_{2r})); general -> sqrt(Cov(X_0, X_{2r}) +
// (4 mu^2 / sigma^4) Cov(X_0, X_r)^2); subordinator_linf ->
// -mu (1 - B r)^(1-alpha) / (B (alpha-1)); subordinator_l2 ->
// (2 mu / sigma^2) Cov(X_0, X_r). Variant/theta mismatches (zero_mean with
// mu != 0, subordinator variants with mu == 0) are contract errors.
double theta_coeff_supou(const ThetaParams& theta, double r, SupouThetaVariant variant);

// Theta coefficient of the return series at integer-valued radius r >= 1:
// sqrt(Delta * theta_X((r-1) Delta)) with the subordinator theta coefficient,
// = sqrt(-Delta mu (1 - B Delta (r-1))^(1-alpha) / (B (alpha-1))).
double theta_coeff_returns(const ThetaParams& theta, double delta, double r);

// Generic coefficient of a scalar mixed moving average by nested adaptive
// quadrature over (A, s). Eta windows are (-inf, -r) and (r, inf) in 2s,
// theta windows are (-inf, -r) in s; the zero-mean, general-mean, and
// finite-variation formulas are chosen by the kernel's declared case. For a
// causal kernel the eta coefficient is taken equal to the theta coefficient.
// Each double integral is evaluated to absolute tolerance quad_tol.
double coeff_generic_mma(const KernelSpec& kernel, double r, CoeffKind kind, double quad_tol);

// KernelSpec for the supOU kernel f(a, u) = exp(a u) 1{u >= 0} with the Gamma
// mixing law of theta and Levy summaries filled for the declared case
// (zero_mean centers the basis; the other cases describe the driftless
// subordinator with mean mu).
KernelSpec make_supou_kernel(const ThetaParams& theta, MmaCase integrability);

// Decay-condition gate for the limit-theorem catalog. Theorem ids:
// clt_mean, clt_mean2, clt_cova_eta, clt_cova_theta, clt_mean_ret,
// clt_multi_acf_ret, clt_multi_4_ret, asy_mom1, asy_mom2, asy_mom3.
// delta_moment is the moment surplus delta > 0 supplied by the caller; the
// result carries the exact threshold and a strict comparison outcome.
GateResult clt_gate(const std::string& theorem, double delta_moment, double decay_exponent);

// Theorem ids accepted by clt_gate, in catalog order.
const std::vector<std::string>& clt_gate_catalog();

// Curve evaluation over a strictly increasing radius grid; the result is
// checked to be nonnegative and nonincreasing.
CoefficientCurve coefficient_curve_supou(const ThetaParams& theta, SupouThetaVariant variant,
                                         const std::vector<double>& radii);
CoefficientCurve coefficient_curve_returns(const ThetaParams& theta, double delta,
                                           const std::vector<double>& radii);
CoefficientCurve coefficient_curve_generic(const KernelSpec& kernel, CoeffKind kind,
                                           const std::vector<double>& radii, double quad_tol);

// Least-squares slope of log(coefficient) against log(radius) over the points
// of the curve with positive radius and positive coefficient.
double loglog_slope(const CoefficientCurve& curve);

}  // namespace supou
