#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "supou/analytics.hpp"
#include "supou/levy.hpp"

namespace supou {

// Sample mean over the full series.
double sample_mean(const std::vector<double>& series);

// Sample autocovariance at lag k with divisor N: the mean-subtracted products
// over the N - k available pairs are summed and divided by N. The divisor-N
// and divisor-(N-k) conventions differ by a factor (N-k)/N, an O(k/N) bias
// traded for a positive semidefinite autocovariance sequence.
double sample_autocov(const std::vector<double>& series, std::size_t k);

// One evaluated empirical moment vector g_{N,m}: the average of the moment
// function over the window t = 1..N-m, length m + 2.
struct MomentVector {
  enum class Kind { supou, returns };
  Kind kind = Kind::supou;
  std::size_t m = 0;
  Eigen::VectorXd values;
};

// Process moment function average: components (X_t - C, X_t X_{t+k} - C^2 -
// D(k) for k = 0..m) averaged over t = 1..N-m with divisor N-m; the
// model-implied terms come from the closed-form process moments.
MomentVector g_supou(const std::vector<double>& x, const ThetaParams& theta, std::size_t m,
                     double delta);

// Squared-return moment function average: components (Y_t^2 - C*, Y_t^4 -
// 3 C*^2 - 3 Var(V), Y_t^2 Y_{t+k}^2 - C*^2 - D*(k) for k = 1..m) averaged
// over t = 1..N-m; the model-implied terms come from the closed-form
// squared-return moments (same removable-pole guard near alpha_pi = 3).
MomentVector g_returns(const std::vector<double>& y, const ThetaParams& theta, std::size_t m,
                       double delta);

// Raw data averages over the t = 1..N-m window: entry 0 the mean of the
// anchor observation, entry k+1 the mean anchored product at lag k (squares
// of the returns for the returns kind). g = data moments - model targets,
// which lets an optimizer precompute the data side once.
Eigen::VectorXd data_moments_supou(const std::vector<double>& x, std::size_t m);
Eigen::VectorXd data_moments_returns(const std::vector<double>& y, std::size_t m);

// Model-implied subtraction targets: (C, C^2 + D(k)) for the process kind,
// (C*, Var(Y^2) + C*^2, C*^2 + D*(k)) for the returns kind.
Eigen::VectorXd model_targets_supou(const ThetaParams& theta, std::size_t m, double delta);
Eigen::VectorXd model_targets_returns(const ThetaParams& theta, std::size_t m, double delta);

// Per-window realizations of the moment functions: row t holds h(X_t, theta)
// (or the squared-return analogue), so the column means equal g_supou /
// g_returns. Input to the long-run covariance estimator.
Eigen::MatrixXd h_panel_supou(const std::vector<double>& x, const ThetaParams& theta,
                              std::size_t m, double delta);
Eigen::MatrixXd h_panel_returns(const std::vector<double>& y, const ThetaParams& theta,
                                std::size_t m, double delta);

inline constexpr long kAutoBandwidth = -1;

// Bartlett-kernel long-run covariance of a moment panel (rows = time): the
// demeaned lag-j cross products with divisor T enter with weight
// 1 - j/(bw + 1), which keeps the estimate positive semidefinite for every
// input. The automatic bandwidth is floor(T^(1/3)); bandwidth 0 reproduces
// the sample covariance.
LagCovMatrix hac(const Eigen::MatrixXd& panel, long bandwidth = kAutoBandwidth);

}  // namespace supou
