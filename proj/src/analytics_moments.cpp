#include <algorithm>
#include <cmath>

#include "supou/analytics.hpp"
#include "supou/errors.hpp"
#include "supou/quad.hpp"

namespace supou {

namespace {

constexpr double kPoleBand = 1e-6;   // returns_moments contract band around alpha = 3
constexpr double kSwitchBand = 1e-2; // closed form -> quadrature switch for the pole-free ops

double pow_u(double base, double expo) { return std::pow(base, expo); }

}  // namespace

double supou_autocov(const ThetaParams& theta, double h) {
  theta.validate();
  require(h >= 0.0, errc::contract, "autocovariance lag must be nonnegative");
  const double a = theta.alpha_pi;
  return -theta.sigma2 * pow_u(1.0 - theta.B * h, 1.0 - a) / (2.0 * theta.B * (a - 1.0));
}

MomentSet supou_moments(const ThetaParams& theta, double delta, std::size_t k_max) {
  theta.validate();
  require(delta > 0.0, errc::contract, "delta must be positive");
  MomentSet set;
  set.kind = MomentSet::Kind::supou;
  set.delta = delta;
  const double a = theta.alpha_pi;
  set.mean = -theta.mu / (theta.B * (a - 1.0));
  set.autocov.reserve(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k)
    set.autocov.push_back(supou_autocov(theta, double(k) * delta));
  set.variance = set.autocov[0];
  return set;
}

namespace {

// D(h) without the repeated validation, for quadrature integrands.
double cov_raw(const ThetaParams& theta, double h) {
  const double a = theta.alpha_pi;
  return -theta.sigma2 * pow_u(1.0 - theta.B * h, 1.0 - a) / (2.0 * theta.B * (a - 1.0));
}

// Var(V_1) = 2 int_0^Delta (Delta - h) D(h) dh via fixed Gauss-Legendre;
// used whenever the closed form's removable (alpha-2)(alpha-3) factors would
// cancel catastrophically.
double integrated_variance_quad(const ThetaParams& theta, double delta) {
  constexpr std::size_t n = 48;
  double x[n], w[n];
  quad::gauss_legendre(n, 0.0, 1.0, x, w);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * (1.0 - x[i]) * cov_raw(theta, delta * x[i]);
  return 2.0 * delta * delta * acc;
}

// Cov(V_0, V_k), k >= 1, as the exact double box integral reduced to one
// dimension with the tent weight:
//   int_0^1 int_0^1 D(Delta (k-1+x+y)) dx dy
//     = int_0^2 D(Delta (k-1+z)) min(z, 2-z) dz.
double returns_cov_quad(const ThetaParams& theta, double delta, long k) {
  constexpr std::size_t n = 32;
  double x[n], w[n];
  double acc = 0.0;
  quad::gauss_legendre(n, 0.0, 1.0, x, w);
  for (std::size_t i = 0; i < n; ++i)
    acc += w[i] * x[i] * cov_raw(theta, delta * (double(k) - 1.0 + x[i]));
  quad::gauss_legendre(n, 1.0, 2.0, x, w);
  for (std::size_t i = 0; i < n; ++i)
    acc += w[i] * (2.0 - x[i]) * cov_raw(theta, delta * (double(k) - 1.0 + x[i]));
  return delta * delta * acc;
}

double f_pow(const ThetaParams& theta, double delta, double k) {
  return pow_u(1.0 - theta.B * delta * k, 3.0 - theta.alpha_pi);
}

double pole_distance(const ThetaParams& theta) {
  return std::min(std::abs(theta.alpha_pi - 3.0), std::abs(theta.alpha_pi - 2.0));
}

}  // namespace

double integrated_variance(const ThetaParams& theta, double delta) {
  theta.validate();
  require(delta > 0.0, errc::contract, "delta must be positive");
  if (pole_distance(theta) <= kSwitchBand) return integrated_variance_quad(theta, delta);
  const double a = theta.alpha_pi;
  const double b = theta.B;
  const double g = f_pow(theta, delta, 1.0) - 1.0 - delta * b * (a - 3.0);
  return -theta.sigma2 * g / (b * b * b * (a - 1.0) * (a - 2.0) * (a - 3.0));
}

double returns_cov(const ThetaParams& theta, double delta, long k) {
  theta.validate();
  require(delta > 0.0, errc::contract, "delta must be positive");
  require(k >= 0, errc::contract, "returns_cov lag must be nonnegative");
  const double cstar = -delta * theta.mu / (theta.B * (theta.alpha_pi - 1.0));
  if (k == 0) return 3.0 * integrated_variance(theta, delta) + 2.0 * cstar * cstar;
  if (pole_distance(theta) <= kSwitchBand) return returns_cov_quad(theta, delta, k);
  const double a = theta.alpha_pi;
  const double b = theta.B;
  const double stencil = f_pow(theta, delta, double(k + 1)) - 2.0 * f_pow(theta, delta, double(k)) +
                         f_pow(theta, delta, double(k - 1));
  return -theta.sigma2 * stencil / (2.0 * b * b * b * (a - 1.0) * (a - 2.0) * (a - 3.0));
}

MomentSet returns_moments(const ThetaParams& theta, double delta, std::size_t k_max) {
  theta.validate();
  require(delta > 0.0, errc::contract, "delta must be positive");
  if (std::abs(theta.alpha_pi - 3.0) < kPoleBand) {
    fail(errc::numeric,
         "returns moments: alpha_pi sits on the removable singularity at 3; evaluate the "
         "closed form in the limit (integrated_variance / returns_cov do this automatically) "
         "or perturb alpha_pi away from 3");
  }
  MomentSet set;
  set.kind = MomentSet::Kind::returns;
  set.delta = delta;
  set.mean = -delta * theta.mu / (theta.B * (theta.alpha_pi - 1.0));
  set.autocov.reserve(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) set.autocov.push_back(returns_cov(theta, delta, long(k)));
  set.variance = set.autocov[0];
  return set;
}

double cum3(const ThetaParams& theta, double m3, double delta, std::array<double, 3> times) {
  theta.validate();
  require(delta > 0.0, errc::contract, "delta must be positive");
  std::sort(times.begin(), times.end());
  const double g = (times[1] - times[0]) + (times[2] - times[0]);
  const double a = theta.alpha_pi;
  return -m3 * pow_u(1.0 - theta.B * delta * g, 1.0 - a) / (3.0 * theta.B * (a - 1.0));
}

double cum4(const ThetaParams& theta, double m4, double delta, std::array<double, 4> times) {
  theta.validate();
  require(delta > 0.0, errc::contract, "delta must be positive");
  std::sort(times.begin(), times.end());
  const double g =
      (times[1] - times[0]) + (times[2] - times[0]) + (times[3] - times[0]);
  const double a = theta.alpha_pi;
  return -m4 * pow_u(1.0 - theta.B * delta * g, 1.0 - a) / (4.0 * theta.B * (a - 1.0));
}

}  // namespace supou
