#include <cmath>

#include "supou/analytics.hpp"
#include "supou/errors.hpp"

namespace supou {

namespace {

// Gradient of C = -mu/(B(alpha-1)) in (mu, sigma2, alpha_pi, B) order.
Eigen::RowVector4d grad_mean(const ThetaParams& t) {
  const double a1 = t.alpha_pi - 1.0;
  Eigen::RowVector4d g;
  g << -1.0 / (t.B * a1), 0.0, t.mu / (t.B * a1 * a1), t.mu / (t.B * t.B * a1);
  return g;
}

// Gradient of D(k) = -sigma2 u^(1-alpha) / (2B(alpha-1)), u = 1 - B Delta k.
Eigen::RowVector4d grad_autocov(const ThetaParams& t, double delta, double k) {
  const double a = t.alpha_pi, B = t.B, a1 = a - 1.0;
  const double u = 1.0 - B * delta * k;
  const double pw = std::pow(u, 1.0 - a);
  Eigen::RowVector4d g;
  g(0) = 0.0;
  g(1) = -pw / (2.0 * B * a1);
  g(2) = t.sigma2 * pw * (a1 * std::log(u) + 1.0) / (2.0 * B * a1 * a1);
  g(3) = -t.sigma2 * std::pow(u, -a) * (a1 * delta * k * B - u) / (2.0 * a1 * B * B);
  return g;
}

// Gradient of Var(V_1) = -sigma2 G / (B^3 P) with G = f_1 - 1 - Delta B (alpha-3),
// P = (alpha-1)(alpha-2)(alpha-3), f_k = (1 - B Delta k)^(3-alpha).
Eigen::RowVector4d grad_var_v(const ThetaParams& t, double delta) {
  const double a = t.alpha_pi, B = t.B, s2 = t.sigma2;
  const double u1 = 1.0 - B * delta;
  const double f1 = std::pow(u1, 3.0 - a);
  const double P = (a - 1.0) * (a - 2.0) * (a - 3.0);
  const double Pa = (a - 2.0) * (a - 3.0) + (a - 1.0) * (a - 3.0) + (a - 1.0) * (a - 2.0);
  const double G = f1 - 1.0 - delta * B * (a - 3.0);
  const double Ga = -f1 * std::log(u1) - delta * B;
  const double Gb = delta * (a - 3.0) * (std::pow(u1, 2.0 - a) - 1.0);
  const double B3 = B * B * B;
  Eigen::RowVector4d g;
  g(0) = 0.0;
  g(1) = -G / (B3 * P);
  g(2) = -s2 * (Ga * P - G * Pa) / (B3 * P * P);
  g(3) = -s2 * (Gb * B - 3.0 * G) / (B3 * B * P);
  return g;
}

// Gradient of D*(k) = -sigma2 F / (2 B^3 P), F = f_(k+1) - 2 f_k + f_(k-1).
Eigen::RowVector4d grad_returns_cov(const ThetaParams& t, double delta, double k) {
  const double a = t.alpha_pi, B = t.B, s2 = t.sigma2;
  const double P = (a - 1.0) * (a - 2.0) * (a - 3.0);
  const double Pa = (a - 2.0) * (a - 3.0) + (a - 1.0) * (a - 3.0) + (a - 1.0) * (a - 2.0);
  auto u = [&](double j) { return 1.0 - B * delta * j; };
  auto f = [&](double j) { return std::pow(u(j), 3.0 - a); };
  const double F = f(k + 1) - 2.0 * f(k) + f(k - 1);
  const double Fa = -(f(k + 1) * std::log(u(k + 1)) - 2.0 * f(k) * std::log(u(k)) +
                      f(k - 1) * std::log(u(k - 1)));
  const double Fb = -(3.0 - a) * delta *
                    ((k + 1) * std::pow(u(k + 1), 2.0 - a) -
                     2.0 * k * std::pow(u(k), 2.0 - a) +
                     (k - 1) * std::pow(u(k - 1), 2.0 - a));
  const double B3 = B * B * B;
  Eigen::RowVector4d g;
  g(0) = 0.0;
  g(1) = -F / (2.0 * B3 * P);
  g(2) = -s2 * (Fa * P - F * Pa) / (2.0 * B3 * P * P);
  g(3) = -s2 * (Fb * B - 3.0 * F) / (2.0 * B3 * B * P);
  return g;
}

}  // namespace

JacobianMatrix jacobian_supou(const ThetaParams& theta, double delta, std::size_t m) {
  theta.validate();
  require(delta > 0.0, errc::contract, "delta must be positive");

  // Rows are negative gradients of the subtracted model moments: the moment
  // function is h_E = X - C, h_k = X_t X_(t+k) - C^2 - D(k).
  JacobianMatrix G(m + 2, 4);
  const Eigen::RowVector4d dC = grad_mean(theta);
  const double C = -theta.mu / (theta.B * (theta.alpha_pi - 1.0));
  G.row(0) = -dC;
  for (std::size_t k = 0; k <= m; ++k)
    G.row(1 + k) = -(2.0 * C * dC + grad_autocov(theta, delta, double(k)));
  return G;
}

JacobianMatrix jacobian_returns(const ThetaParams& theta, double delta, std::size_t m) {
  theta.validate();
  require(delta > 0.0, errc::contract, "delta must be positive");
  require(std::abs(theta.alpha_pi - 3.0) >= 1e-6, errc::numeric,
          "closed-form squared-return gradients have a removable pole at alpha_pi = 3; "
          "perturb alpha_pi away from 3");

  // h~_Var = Y^2 - C*, h~_0 = Y^4 - 3 C*^2 - 3 Var(V), h~_k = Y_t^2 Y_(t+k)^2
  // - C*^2 - D*(k); rows are the negative theta-gradients of the subtracted
  // parts.
  JacobianMatrix G(m + 2, 4);
  const double cstar = -delta * theta.mu / (theta.B * (theta.alpha_pi - 1.0));
  const Eigen::RowVector4d dCs = delta * grad_mean(theta);
  G.row(0) = -dCs;
  G.row(1) = -(6.0 * cstar * dCs + 3.0 * grad_var_v(theta, delta));
  for (std::size_t k = 1; k <= m; ++k)
    G.row(1 + k) = -(2.0 * cstar * dCs + grad_returns_cov(theta, delta, double(k)));
  return G;
}

}  // namespace supou
