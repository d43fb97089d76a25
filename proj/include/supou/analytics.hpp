#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <vector>

#include "supou/levy.hpp"

namespace supou {

// Closed-form second-order structure of the process and of squared returns.
struct MomentSet {
  enum class Kind { supou, returns };
  Kind kind = Kind::supou;
  double delta = 1.0;
  double mean = 0.0;               // C (process) or C* (squared returns)
  double variance = 0.0;           // Var(X) or Var(Y^2)
  std::vector<double> autocov;     // D(k) or D*(k), k = 0..k_max; autocov[0] == variance
};

// C = -mu/(B(alpha-1)); Var = -sigma2/(2B(alpha-1));
// D(k) = -sigma2 (1 - B k Delta)^(1-alpha) / (2B(alpha-1)).
MomentSet supou_moments(const ThetaParams& theta, double delta, std::size_t k_max);

// Cov(X_0, X_h) at a continuous nonnegative lag h in time units.
double supou_autocov(const ThetaParams& theta, double h);

// E[Y^2] = C* = -Delta mu/(B(alpha-1)); Var(Y_1^2) = 3 Var(V_1) + 2 C*^2;
// Cov(Y_1^2, Y_{1+k}^2) = -sigma2 (f_{k+1} - 2 f_k + f_{k-1}) /
// (2 B^3 (alpha-1)(alpha-2)(alpha-3)) with f_k = (1 - B Delta k)^(3-alpha).
// Throws a numeric error when alpha_pi is within 1e-6 of the removable pole
// at 3; integrated_variance / returns_cov evaluate through the pole instead.
MomentSet returns_moments(const ThetaParams& theta, double delta, std::size_t k_max);

// Var(V_1), the variance of integrated volatility over one step; pole-free
// (switches to a fixed-order quadrature of the lag covariance near the
// removable singularities of the closed form).
double integrated_variance(const ThetaParams& theta, double delta);

// Cov(V_0, V_k) for k >= 1 and Var(Y_1^2) for k = 0; pole-free like
// integrated_variance. Coincides with returns_moments away from the poles.
double returns_cov(const ThetaParams& theta, double delta, long k);

// Third joint cumulant of (X_{t1 Delta}, X_{t2 Delta}, X_{t3 Delta}) for the
// third Levy cumulant m3; times are real-valued lag coordinates and are
// sorted internally (cumulants are symmetric in their arguments):
// kappa3 = -m3 (1 - B Delta g)^(1-alpha) / (3B(alpha-1)), g = t2+t3-2t1.
double cum3(const ThetaParams& theta, double m3, double delta, std::array<double, 3> times);

// Fourth joint cumulant, g = t2+t3+t4-3t1 after sorting:
// kappa4 = -m4 (1 - B Delta g)^(1-alpha) / (4B(alpha-1)).
double cum4(const ThetaParams& theta, double m4, double delta, std::array<double, 4> times);

// Joint cumulant of integrated volatility over the Delta-boxes with the given
// start indices (3 or 4 of them): the box integral of cum3/cum4. Strictly
// separated minimum boxes evaluate through an exact pole-free reduction of
// the closed form; overlapping boxes go through nested Gauss-Legendre
// quadrature of the un-integrated cumulant with order doubling until quad_tol
// is met.
double integrated_cum(const ThetaParams& theta, const LevyCumulants& levy, double delta,
                      const std::vector<long>& indices, double quad_tol = 1e-10);

// Ordered-region moment integrals entering the squared-return covariance
// tables. The index tuple (3 or 4 entries) must match one of the tabulated
// coincidence patterns; unsupported patterns are contract errors.
double a_term(const ThetaParams& theta, const LevyCumulants& levy, double delta,
              const std::vector<long>& indices, double quad_tol = 1e-9);

struct LagCovMatrix {
  enum class Kind { h_sigma, w_sigma, empirical };
  Kind kind = Kind::h_sigma;
  Eigen::MatrixXd mat;      // (m+2) x (m+2): row 1 is the mean row, then lags 0..m
  double tail_tol = 0.0;    // relative tail tolerance used
  long lag_cutoff = 0;      // largest |l| summed
  bool psd_clipped = false; // eigenvalue floor applied
  double clip_magnitude = 0.0;
};

// Long-run covariance of the process moment function h(X_t, theta): entry
// (a,b) = sum over l of Cov(h_a(X_0..), h_b(X_l..)), truncated when the
// power-law tail bound falls below tail_tol * scale, then symmetrized and
// eigenvalue-floored at zero (failure if the clip exceeds 1e-6 * trace).
LagCovMatrix h_sigma(const ThetaParams& theta, const LevyCumulants& levy, double delta,
                     std::size_t m, double tail_tol = 1e-8);

// Long-run covariance of the squared-return moment function; assembled from
// D*, the integrated cumulants and the conditional-Gaussian moment structure
// of the returns. diagnostic_pure_products replaces every entry by the
// all-indices-distinct product formula with the third and fourth cumulants
// zeroed (hand-checkable reduction, not for production use).
LagCovMatrix w_sigma(const ThetaParams& theta, const LevyCumulants& levy, double delta,
                     std::size_t m, double tail_tol = 1e-8, double quad_tol = 1e-10,
                     bool diagnostic_pure_products = false);

using JacobianMatrix = Eigen::MatrixXd;  // (m+2) x 4, order (mu, sigma2, alpha_pi, B)

// dE[h]/dtheta' for the process moment function (constant in the data).
JacobianMatrix jacobian_supou(const ThetaParams& theta, double delta, std::size_t m);

// dE[h~]/dtheta' for the squared-return moment function; same pole guard as
// returns_moments.
JacobianMatrix jacobian_returns(const ThetaParams& theta, double delta, std::size_t m);

}  // namespace supou
