#include "supou/empirics.hpp"

#include <cmath>

#include "supou/errors.hpp"

namespace supou {

namespace {

void check_series(const std::vector<double>& series) {
  require(!series.empty(), errc::contract, "series must be nonempty");
  for (double v : series) {
    require(std::isfinite(v), errc::contract, "series contains a non-finite value");
  }
}

// Model-implied subtraction targets: entry 0 is the mean target, entry k+1
// the raw second-moment target mean^2 + autocov(k).
Eigen::VectorXd moment_targets(const MomentSet& ms, std::size_t m) {
  Eigen::VectorXd targets(m + 2);
  targets[0] = ms.mean;
  for (std::size_t k = 0; k <= m; ++k) {
    targets[k + 1] = ms.mean * ms.mean + ms.autocov[k];
  }
  return targets;
}

// The squared-return components anchor on squares: Y^2 plays the role of the
// observation, so the targets are C*, Var(Y^2) + C*^2, then C*^2 + D*(k).
Eigen::VectorXd returns_targets(const MomentSet& ms, std::size_t m) {
  Eigen::VectorXd targets(m + 2);
  targets[0] = ms.mean;
  targets[1] = ms.variance + ms.mean * ms.mean;
  for (std::size_t k = 1; k <= m; ++k) {
    targets[k + 1] = ms.mean * ms.mean + ms.autocov[k];
  }
  return targets;
}

Eigen::VectorXd raw_data_moments(const std::vector<double>& obs, std::size_t m) {
  const std::size_t window = obs.size() - m;
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(m + 2);
  for (std::size_t t = 0; t < window; ++t) {
    sums[0] += obs[t];
    for (std::size_t k = 0; k <= m; ++k) sums[k + 1] += obs[t] * obs[t + k];
  }
  return sums / static_cast<double>(window);
}

Eigen::MatrixXd build_panel(const std::vector<double>& obs, const Eigen::VectorXd& targets,
                            std::size_t m) {
  const std::size_t window = obs.size() - m;
  Eigen::MatrixXd panel(window, m + 2);
  for (std::size_t t = 0; t < window; ++t) {
    panel(t, 0) = obs[t] - targets[0];
    for (std::size_t k = 0; k <= m; ++k) {
      panel(t, k + 1) = obs[t] * obs[t + k] - targets[k + 1];
    }
  }
  return panel;
}

MomentVector average_moments(const std::vector<double>& obs, const Eigen::VectorXd& targets,
                             std::size_t m, MomentVector::Kind kind) {
  MomentVector out;
  out.kind = kind;
  out.m = m;
  out.values = raw_data_moments(obs, m) - targets;
  return out;
}

std::vector<double> squares(const std::vector<double>& y) {
  std::vector<double> sq(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) sq[i] = y[i] * y[i];
  return sq;
}

}  // namespace

double sample_mean(const std::vector<double>& series) {
  check_series(series);
  double sum = 0.0;
  for (double v : series) sum += v;
  return sum / static_cast<double>(series.size());
}

double sample_autocov(const std::vector<double>& series, std::size_t k) {
  check_series(series);
  const std::size_t n = series.size();
  require(k < n, errc::contract, "autocovariance lag must be smaller than the series length");
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t j = 0; j + k < n; ++j) {
    sum += (series[j] - mean) * (series[j + k] - mean);
  }
  return sum / static_cast<double>(n);
}

Eigen::VectorXd data_moments_supou(const std::vector<double>& x, std::size_t m) {
  check_series(x);
  require(x.size() > m, errc::contract, "series length must exceed the lag count");
  return raw_data_moments(x, m);
}

Eigen::VectorXd data_moments_returns(const std::vector<double>& y, std::size_t m) {
  check_series(y);
  require(y.size() > m, errc::contract, "series length must exceed the lag count");
  return raw_data_moments(squares(y), m);
}

Eigen::VectorXd model_targets_supou(const ThetaParams& theta, std::size_t m, double delta) {
  return moment_targets(supou_moments(theta, delta, m), m);
}

Eigen::VectorXd model_targets_returns(const ThetaParams& theta, std::size_t m, double delta) {
  return returns_targets(returns_moments(theta, delta, m), m);
}

MomentVector g_supou(const std::vector<double>& x, const ThetaParams& theta, std::size_t m,
                     double delta) {
  check_series(x);
  require(x.size() > m, errc::contract, "series length must exceed the lag count");
  const MomentSet ms = supou_moments(theta, delta, m);
  return average_moments(x, moment_targets(ms, m), m, MomentVector::Kind::supou);
}

MomentVector g_returns(const std::vector<double>& y, const ThetaParams& theta, std::size_t m,
                       double delta) {
  check_series(y);
  require(y.size() > m, errc::contract, "series length must exceed the lag count");
  const MomentSet ms = returns_moments(theta, delta, m);
  MomentVector out = average_moments(squares(y), returns_targets(ms, m), m,
                                     MomentVector::Kind::returns);
  return out;
}

Eigen::MatrixXd h_panel_supou(const std::vector<double>& x, const ThetaParams& theta,
                              std::size_t m, double delta) {
  check_series(x);
  require(x.size() > m, errc::contract, "series length must exceed the lag count");
  const MomentSet ms = supou_moments(theta, delta, m);
  return build_panel(x, moment_targets(ms, m), m);
}

Eigen::MatrixXd h_panel_returns(const std::vector<double>& y, const ThetaParams& theta,
                                std::size_t m, double delta) {
  check_series(y);
  require(y.size() > m, errc::contract, "series length must exceed the lag count");
  const MomentSet ms = returns_moments(theta, delta, m);
  return build_panel(squares(y), returns_targets(ms, m), m);
}

LagCovMatrix hac(const Eigen::MatrixXd& panel, long bandwidth) {
  const long t_len = panel.rows();
  require(t_len >= 1 && panel.cols() >= 1, errc::contract, "moment panel must be nonempty");
  require(panel.allFinite(), errc::contract, "moment panel contains a non-finite value");
  long bw = bandwidth;
  if (bw < 0) bw = static_cast<long>(std::floor(std::cbrt(static_cast<double>(t_len)) + 1e-9));
  require(t_len > bw, errc::contract,
          "insufficient data: panel length must exceed the bandwidth");
  const Eigen::RowVectorXd mean = panel.colwise().mean();
  const Eigen::MatrixXd centered = panel.rowwise() - mean;
  Eigen::MatrixXd s = centered.transpose() * centered / static_cast<double>(t_len);
  for (long j = 1; j <= bw; ++j) {
    const double w = 1.0 - static_cast<double>(j) / static_cast<double>(bw + 1);
    const Eigen::MatrixXd gj = centered.bottomRows(t_len - j).transpose() *
                               centered.topRows(t_len - j) / static_cast<double>(t_len);
    s += w * (gj + gj.transpose());
  }
  LagCovMatrix out;
  out.kind = LagCovMatrix::Kind::empirical;
  out.mat = 0.5 * (s + s.transpose());
  out.tail_tol = 0.0;
  out.lag_cutoff = bw;
  out.psd_clipped = false;
  out.clip_magnitude = 0.0;
  return out;
}

}  // namespace supou
