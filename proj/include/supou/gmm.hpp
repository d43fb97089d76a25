#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "supou/analytics.hpp"
#include "supou/empirics.hpp"
#include "supou/levy.hpp"

namespace supou {

enum class Weighting { identity, two_step_hac, two_step_theory };

std::string to_string(Weighting w);

// Closed parameter box for (mu, sigma2, alpha_pi, B). The optimizer works in
// transformed coordinates whose decode step clamps into this box, so every
// iterate is feasible by construction.
struct ParameterBox {
  double mu_lo = 0.0;
  double mu_hi = 100.0;
  double sigma2_lo = 1e-6;
  double sigma2_hi = 100.0;
  double alpha_lo = 2.05;
  double alpha_hi = 50.0;
  double b_lo = -100.0;
  double b_hi = -1e-4;

  void validate() const;
  bool contains(const ThetaParams& theta) const;
  ThetaParams clamp(const ThetaParams& theta) const;
};

// Simplex search settings. x_tol is the simplex-size stopping threshold in
// transformed coordinates; f_tol, when positive, additionally stops once the
// best value improves by less than f_tol between iterations. jitter_seed
// drives the deterministic restart spread.
struct OptimizerConfig {
  std::size_t max_iter = 5000;
  double x_tol = 1e-9;
  double f_tol = 0.0;
  std::size_t restarts = 8;
  std::uint64_t jitter_seed = 20240901u;

  void validate() const;
};

struct GmmConfig {
  MomentVector::Kind kind = MomentVector::Kind::supou;
  std::size_t m = 6;
  double delta = 1.0;
  Weighting weighting = Weighting::identity;
  OptimizerConfig optimizer;
  ParameterBox box;

  void validate() const;
};

struct GmmResult {
  ThetaParams theta_hat;
  double objective = 0.0;          // g' W g at theta_hat under weight_used
  Eigen::MatrixXd weight_used;     // (m+2) x (m+2)
  Eigen::Matrix4d sandwich_cov;    // M Sigma M' / N, symmetrized
  Eigen::Vector4d std_errors;      // sqrt of the sandwich diagonal
  std::size_t iterations = 0;      // winning restart's iteration count
  bool converged = false;
  std::size_t restart_index = 0;   // winning restart (value, index) order
  double j_stat = 0.0;             // N * objective
  double smallest_singular = 0.0;  // smallest singular value of the Jacobian
  bool weight_regularized = false; // eigenvalue floor engaged when inverting
  std::size_t n_obs = 0;
};

struct MinimizeResult {
  ThetaParams argmin;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Quadratic form g' W g. W must be square, symmetric, and match g.
double objective(const MomentVector& g, const Eigen::MatrixXd& weight);

// Inverse of a symmetric PSD matrix through its eigendecomposition, with
// eigenvalues floored at 1e-10 times the largest. out_flagged, when given,
// reports whether the floor engaged (a numerically singular input).
Eigen::MatrixXd floored_inverse(const Eigen::MatrixXd& s, bool* out_flagged = nullptr);

// Nelder-Mead simplex on transformed coordinates (log for sigma2 and for
// alpha_pi minus its lower bound, negated log for -B, softplus for mu), so
// every trial point satisfies mu >= 0, sigma2 > 0, alpha_pi > 2, B < 0 and
// lies in the box. Non-convergence within max_iter is reported through the
// flag, not an error; multi-start callers decide what to do with it.
MinimizeResult minimize(const std::function<double(const ThetaParams&)>& fn,
                        const ThetaParams& start, const ParameterBox& box,
                        const OptimizerConfig& cfg);

// Sandwich asymptotic covariance M Sigma M' / N with M = (G'AG)^{-1} G'A.
// With A = Sigma^{-1} this reduces to (G' Sigma^{-1} G)^{-1} / N.
Eigen::Matrix4d asymptotic_cov(const ThetaParams& theta_hat, const Eigen::MatrixXd& a_weight,
                               const LagCovMatrix& sigma, const JacobianMatrix& g_jac,
                               std::size_t n_obs);

// Full moment estimator: stage 1 minimizes with the identity weight from
// jittered multi-starts; two-step weightings re-minimize with the inverse of
// an estimated or model-implied long-run covariance at the stage-1 point.
GmmResult estimate(const std::vector<double>& data, const GmmConfig& config);

}  // namespace supou
