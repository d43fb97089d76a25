#include "supou/gmm.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <memory>
#include <utility>

#include "supou/errors.hpp"
#include "supou/rng.hpp"

namespace supou {

namespace {

// Identification and the moment formulas degrade toward alpha_pi = 2, so the
// box may not reach below 2 plus this margin.
constexpr double kAlphaMargin = 0.05;

// Returned by the optimizer objective when the moment formulas refuse a trial
// point (the alpha_pi = 3 pole of the squared-return moments); the simplex
// contracts away from such points without aborting the search.
constexpr double kPolePenalty = 1e100;

constexpr double kTinyCoord = 1e-8;

double softplus(double u) { return u > 30.0 ? u : std::log1p(std::exp(u)); }

double inv_softplus(double x) { return x > 30.0 ? x : std::log(std::expm1(x)); }

// Transformed coordinates: softplus for mu, log for sigma2 and for alpha_pi
// above its lower bound, log of -B. Decoding clamps into the box, so every
// point the simplex can reach is feasible.
ThetaParams decode(const Eigen::Vector4d& u, const ParameterBox& box) {
  ThetaParams th;
  th.mu = softplus(u[0]);
  th.sigma2 = std::exp(std::min(u[1], 700.0));
  th.alpha_pi = box.alpha_lo + std::exp(std::min(u[2], 700.0));
  th.B = -std::exp(std::min(u[3], 700.0));
  return box.clamp(th);
}

Eigen::Vector4d encode(const ThetaParams& theta, const ParameterBox& box) {
  const ThetaParams c = box.clamp(theta);
  Eigen::Vector4d u;
  u[0] = inv_softplus(std::max(c.mu, kTinyCoord));
  u[1] = std::log(c.sigma2);
  u[2] = std::log(std::max(c.alpha_pi - box.alpha_lo, kTinyCoord));
  u[3] = std::log(-c.B);
  return u;
}

std::string format_scientific(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

struct MultiStartOutcome {
  MinimizeResult result;
  std::size_t index = 0;
};

// Restart 0 runs from the base point, the rest from deterministic jitters of
// its transformed coordinates. Results are reduced by (value, index) over the
// converged runs, so the outcome does not depend on scheduling.
MultiStartOutcome multi_start(const std::function<double(const ThetaParams&)>& fn,
                              const ThetaParams& base, const ParameterBox& box,
                              const OptimizerConfig& cfg, double jitter_scale,
                              std::uint64_t stream_offset) {
  std::vector<ThetaParams> starts;
  starts.reserve(cfg.restarts);
  starts.push_back(box.clamp(base));
  for (std::size_t j = 1; j < cfg.restarts; ++j) {
    Rng rng = Rng::stream(cfg.jitter_seed, stream_offset + j);
    Eigen::Vector4d u = encode(base, box);
    for (int i = 0; i < 4; ++i) u[i] += jitter_scale * (2.0 * rng.uniform() - 1.0);
    starts.push_back(decode(u, box));
  }

  std::vector<std::future<MinimizeResult>> runs;
  runs.reserve(starts.size());
  for (const ThetaParams& s : starts) {
    runs.push_back(std::async(std::launch::async,
                              [&fn, s, &box, &cfg] { return minimize(fn, s, box, cfg); }));
  }

  MultiStartOutcome best;
  bool have = false;
  for (std::size_t j = 0; j < runs.size(); ++j) {
    MinimizeResult r = runs[j].get();
    if (!r.converged) continue;
    if (!have || r.value < best.result.value) {
      best.result = std::move(r);
      best.index = j;
      have = true;
    }
  }
  require(have, errc::numeric, "no optimizer restart converged");
  return best;
}

// Moment-matched starting point: invert the mean and variance relations at
// the reference shape (alpha_pi, B) = (4, -1).
ThetaParams base_start(const Eigen::VectorXd& dhat, bool returns_kind, double delta,
                       const ParameterBox& box) {
  ThetaParams th{1.0, 1.0, 4.0, -1.0};
  const double mean = dhat[0];
  const double var = std::max(dhat[1] - mean * mean, 1e-8);
  if (!returns_kind) {
    th.mu = 3.0 * std::max(mean, 1e-6);
    th.sigma2 = 6.0 * var;
  } else {
    const double cstar = std::max(mean, 1e-6);
    th.mu = 3.0 * cstar / delta;
    const double varv = std::max((var - 2.0 * cstar * cstar) / 3.0, 1e-8);
    ThetaParams unit = th;
    unit.sigma2 = 1.0;
    const double varv_unit = integrated_variance(unit, delta);
    th.sigma2 = varv / std::max(varv_unit, 1e-12);
  }
  return box.clamp(th);
}

}  // namespace

std::string to_string(Weighting w) {
  switch (w) {
    case Weighting::identity: return "identity";
    case Weighting::two_step_hac: return "two_step_hac";
    case Weighting::two_step_theory: return "two_step_theory";
  }
  fail(errc::contract, "unknown weighting");
}

Eigen::MatrixXd floored_inverse(const Eigen::MatrixXd& s, bool* out_flagged) {
  require(s.rows() == s.cols() && s.rows() >= 1, errc::contract,
          "matrix to invert must be square and nonempty");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
  require(es.info() == Eigen::Success, errc::numeric,
          "weight eigendecomposition failed to converge");
  const Eigen::VectorXd ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  require(top > 0.0, errc::numeric, "weight target matrix has no positive eigenvalue");
  const double floor_val = 1e-10 * top;
  bool flagged = false;
  Eigen::VectorXd inv_ev(ev.size());
  for (long i = 0; i < ev.size(); ++i) {
    double lambda = ev[i];
    if (lambda < floor_val) {
      lambda = floor_val;
      flagged = true;
    }
    inv_ev[i] = 1.0 / lambda;
  }
  Eigen::MatrixXd w = es.eigenvectors() * inv_ev.asDiagonal() * es.eigenvectors().transpose();
  if (out_flagged != nullptr) *out_flagged = flagged;
  return 0.5 * (w + w.transpose());
}

void ParameterBox::validate() const {
  require(mu_lo >= 0.0, errc::contract, "mu lower bound must be nonnegative");
  require(mu_lo < mu_hi, errc::contract, "mu bounds must have a nonempty interior");
  require(sigma2_lo > 0.0, errc::contract, "sigma2 lower bound must be positive");
  require(sigma2_lo < sigma2_hi, errc::contract, "sigma2 bounds must have a nonempty interior");
  require(alpha_lo >= 2.0 + kAlphaMargin - 1e-12, errc::contract,
          "alpha_pi lower bound must be at least 2.05");
  require(alpha_lo < alpha_hi, errc::contract, "alpha_pi bounds must have a nonempty interior");
  require(b_hi < 0.0, errc::contract, "B upper bound must be negative");
  require(b_lo < b_hi, errc::contract, "B bounds must have a nonempty interior");
}

bool ParameterBox::contains(const ThetaParams& theta) const {
  return theta.mu >= mu_lo && theta.mu <= mu_hi && theta.sigma2 >= sigma2_lo &&
         theta.sigma2 <= sigma2_hi && theta.alpha_pi >= alpha_lo && theta.alpha_pi <= alpha_hi &&
         theta.B >= b_lo && theta.B <= b_hi;
}

ThetaParams ParameterBox::clamp(const ThetaParams& theta) const {
  ThetaParams c = theta;
  c.mu = std::clamp(c.mu, mu_lo, mu_hi);
  c.sigma2 = std::clamp(c.sigma2, sigma2_lo, sigma2_hi);
  c.alpha_pi = std::clamp(c.alpha_pi, alpha_lo, alpha_hi);
  c.B = std::clamp(c.B, b_lo, b_hi);
  return c;
}

void OptimizerConfig::validate() const {
  require(max_iter >= 1, errc::contract, "max_iter must be at least 1");
  require(x_tol > 0.0, errc::contract, "x_tol must be positive");
  require(f_tol >= 0.0, errc::contract, "f_tol must be nonnegative");
  require(restarts >= 1, errc::contract, "at least one restart is required");
}

void GmmConfig::validate() const {
  require(m >= 2, errc::contract, "at least two lags are required to identify four parameters");
  require(delta > 0.0, errc::contract, "delta must be positive");
  optimizer.validate();
  box.validate();
}

double objective(const MomentVector& g, const Eigen::MatrixXd& weight) {
  const long n = g.values.size();
  require(n >= 1, errc::contract, "moment vector must be nonempty");
  require(weight.rows() == n && weight.cols() == n, errc::contract,
          "weight matrix dimensions must match the moment vector");
  require(weight.isApprox(weight.transpose(), 1e-8), errc::contract,
          "weight matrix must be symmetric");
  const double value = g.values.dot(weight * g.values);
  const double scale = 1.0 + weight.cwiseAbs().maxCoeff() * g.values.squaredNorm();
  require(value >= -1e-10 * scale, errc::contract, "weight matrix must be positive semidefinite");
  return std::max(value, 0.0);
}

MinimizeResult minimize(const std::function<double(const ThetaParams&)>& fn,
                        const ThetaParams& start, const ParameterBox& box,
                        const OptimizerConfig& cfg) {
  box.validate();
  cfg.validate();
  require(static_cast<bool>(fn), errc::contract, "objective function must be callable");
  require(box.contains(start), errc::contract, "start must lie inside the parameter box");

  struct Ctx {
    const std::function<double(const ThetaParams&)>* fn;
    const ParameterBox* box;
  } ctx{&fn, &box};

  gsl_multimin_function target;
  target.n = 4;
  target.params = &ctx;
  target.f = [](const gsl_vector* v, void* p) -> double {
    auto* c = static_cast<Ctx*>(p);
    Eigen::Vector4d u;
    for (int i = 0; i < 4; ++i) u[i] = gsl_vector_get(v, i);
    const double val = (*c->fn)(decode(u, *c->box));
    return std::isfinite(val) ? val : kPolePenalty;
  };

  using VecPtr = std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>;
  VecPtr x0(gsl_vector_alloc(4), gsl_vector_free);
  VecPtr step(gsl_vector_alloc(4), gsl_vector_free);
  require(x0 && step, errc::resource, "failed to allocate optimizer vectors");
  const Eigen::Vector4d u0 = encode(start, box);
  for (int i = 0; i < 4; ++i) {
    gsl_vector_set(x0.get(), i, u0[i]);
    gsl_vector_set(step.get(), i, 0.3);
  }

  using MinPtr = std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)>;
  MinPtr solver(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 4),
                gsl_multimin_fminimizer_free);
  require(static_cast<bool>(solver), errc::resource, "failed to allocate the simplex minimizer");
  require(gsl_multimin_fminimizer_set(solver.get(), &target, x0.get(), step.get()) == 0,
          errc::numeric, "failed to initialize the simplex minimizer");

  std::size_t iter = 0;
  bool converged = false;
  double prev = std::numeric_limits<double>::infinity();
  while (iter < cfg.max_iter) {
    ++iter;
    const int status = gsl_multimin_fminimizer_iterate(solver.get());
    if (status == GSL_ENOPROG) {
      converged = true;  // machine precision reached; nothing further to gain
      break;
    }
    if (status != 0) break;
    const double size = gsl_multimin_fminimizer_size(solver.get());
    const double fval = solver->fval;
    if (size < cfg.x_tol) {
      converged = true;
      break;
    }
    if (cfg.f_tol > 0.0 && std::abs(prev - fval) <= cfg.f_tol) {
      converged = true;
      break;
    }
    prev = fval;
  }

  Eigen::Vector4d u_best;
  for (int i = 0; i < 4; ++i) u_best[i] = gsl_vector_get(solver->x, i);
  MinimizeResult out;
  out.argmin = decode(u_best, box);
  out.value = solver->fval;
  out.iterations = iter;
  out.converged = converged;
  return out;
}

Eigen::Matrix4d asymptotic_cov(const ThetaParams& theta_hat, const Eigen::MatrixXd& a_weight,
                               const LagCovMatrix& sigma, const JacobianMatrix& g_jac,
                               std::size_t n_obs) {
  theta_hat.validate();
  const long dim = g_jac.rows();
  require(g_jac.cols() == 4, errc::contract, "Jacobian must have four columns");
  require(dim >= 4, errc::contract, "Jacobian must have at least four rows");
  require(a_weight.rows() == dim && a_weight.cols() == dim, errc::contract,
          "weight matrix dimensions must match the Jacobian");
  require(sigma.mat.rows() == dim && sigma.mat.cols() == dim, errc::contract,
          "long-run covariance dimensions must match the Jacobian");
  require(n_obs >= 1, errc::contract, "sample size must be positive");
  require(a_weight.isApprox(a_weight.transpose(), 1e-8), errc::contract,
          "weight matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> aes(a_weight);
  require(aes.info() == Eigen::Success, errc::numeric,
          "weight eigendecomposition failed to converge");
  require(aes.eigenvalues().minCoeff() >=
              -1e-10 * std::max(1.0, aes.eigenvalues().cwiseAbs().maxCoeff()),
          errc::contract, "weight matrix must be positive semidefinite");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g_jac);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smax > 0.0) || smin <= 1e-12 * smax) {
    fail(errc::numeric, "moment Jacobian is rank deficient; smallest singular value " +
                            format_scientific(smin));
  }

  // Weakly identified directions (near-flat objective ridges) make G'AG very
  // ill conditioned; that is reported through huge sandwich variances and the
  // smallest singular value, not as a failure. Only a matrix singular at
  // working precision is refused.
  const Eigen::Matrix4d gag = g_jac.transpose() * a_weight * g_jac;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> ges(gag);
  require(ges.info() == Eigen::Success, errc::numeric,
          "eigendecomposition of G'AG failed to converge");
  const double gtop = ges.eigenvalues().maxCoeff();
  require(gtop > 0.0 && ges.eigenvalues().minCoeff() > 1e-16 * gtop, errc::numeric,
          "G'AG is numerically singular; the weight matrix annihilates the Jacobian range");
  const Eigen::Matrix4d gag_inv = ges.eigenvectors() *
                                  ges.eigenvalues().cwiseInverse().asDiagonal() *
                                  ges.eigenvectors().transpose();
  const Eigen::Matrix<double, 4, Eigen::Dynamic> m_mat =
      gag_inv * g_jac.transpose() * a_weight;
  const Eigen::Matrix4d cov =
      m_mat * sigma.mat * m_mat.transpose() / static_cast<double>(n_obs);
  return 0.5 * (cov + cov.transpose());
}

GmmResult estimate(const std::vector<double>& data, const GmmConfig& config) {
  config.validate();
  const std::size_t dim = config.m + 2;
  require(data.size() > 10 * dim, errc::contract,
          "insufficient data: series length must exceed 10 * (m + 2)");
  const bool returns_kind = config.kind == MomentVector::Kind::returns;
  const std::size_t n_obs = data.size();

  const Eigen::VectorXd dhat = returns_kind ? data_moments_returns(data, config.m)
                                            : data_moments_supou(data, config.m);
  const auto model_targets = [&](const ThetaParams& th) {
    return returns_kind ? model_targets_returns(th, config.m, config.delta)
                        : model_targets_supou(th, config.m, config.delta);
  };
  const auto make_objective = [&](const Eigen::MatrixXd& w) {
    return [&dhat, &model_targets, w](const ThetaParams& th) -> double {
      Eigen::VectorXd g;
      try {
        g = dhat - model_targets(th);
      } catch (const Error& err) {
        if (err.kind() == errc::numeric) return kPolePenalty;
        throw;
      }
      if (!g.allFinite()) return kPolePenalty;
      const double value = g.dot(w * g);
      return std::isfinite(value) ? value : kPolePenalty;
    };
  };

  const Eigen::MatrixXd identity =
      Eigen::MatrixXd::Identity(static_cast<long>(dim), static_cast<long>(dim));
  const ThetaParams start = base_start(dhat, returns_kind, config.delta, config.box);
  MultiStartOutcome stage1 =
      multi_start(make_objective(identity), start, config.box, config.optimizer, 1.5, 0);

  Eigen::MatrixXd weight_used = identity;
  bool weight_regularized = false;
  MultiStartOutcome final_outcome = stage1;

  if (config.weighting != Weighting::identity) {
    const ThetaParams theta1 = stage1.result.argmin;
    Eigen::MatrixXd target;
    if (config.weighting == Weighting::two_step_hac) {
      const Eigen::MatrixXd panel = returns_kind
                                        ? h_panel_returns(data, theta1, config.m, config.delta)
                                        : h_panel_supou(data, theta1, config.m, config.delta);
      target = hac(panel).mat;
    } else {
      require(theta1.mu > 0.0, errc::numeric,
              "two-step theory weighting requires a positive stage-one mean estimate");
      const LevyCumulants levy =
          levy_cumulants(exponential_subordinator(theta1.mu, theta1.sigma2));
      target = returns_kind ? w_sigma(theta1, levy, config.delta, config.m).mat
                            : h_sigma(theta1, levy, config.delta, config.m).mat;
    }
    bool flagged = false;
    weight_used = floored_inverse(target, &flagged);
    weight_regularized = flagged;
    final_outcome =
        multi_start(make_objective(weight_used), theta1, config.box, config.optimizer, 0.5, 1000);
  }

  const ThetaParams theta_hat = final_outcome.result.argmin;
  const JacobianMatrix g_jac = returns_kind
                                   ? jacobian_returns(theta_hat, config.delta, config.m)
                                   : jacobian_supou(theta_hat, config.delta, config.m);

  LagCovMatrix sigma;
  if (config.weighting == Weighting::two_step_theory) {
    require(theta_hat.mu > 0.0, errc::numeric,
            "two-step theory weighting requires a positive mean estimate");
    const LevyCumulants levy =
        levy_cumulants(exponential_subordinator(theta_hat.mu, theta_hat.sigma2));
    sigma = returns_kind ? w_sigma(theta_hat, levy, config.delta, config.m)
                         : h_sigma(theta_hat, levy, config.delta, config.m);
  } else {
    const Eigen::MatrixXd panel = returns_kind
                                      ? h_panel_returns(data, theta_hat, config.m, config.delta)
                                      : h_panel_supou(data, theta_hat, config.m, config.delta);
    sigma = hac(panel);
  }

  GmmResult out;
  out.theta_hat = theta_hat;
  out.objective = std::max(final_outcome.result.value, 0.0);
  out.weight_used = weight_used;
  out.sandwich_cov = asymptotic_cov(theta_hat, weight_used, sigma, g_jac, n_obs);
  for (int i = 0; i < 4; ++i) {
    const double v = out.sandwich_cov(i, i);
    require(v >= -1e-12 * (1.0 + std::abs(out.sandwich_cov.trace())), errc::numeric,
            "sandwich covariance has a negative diagonal entry");
    out.std_errors[i] = std::sqrt(std::max(v, 0.0));
  }
  out.iterations = final_outcome.result.iterations;
  out.converged = final_outcome.result.converged;
  out.restart_index = final_outcome.index;
  out.j_stat = static_cast<double>(n_obs) * out.objective;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g_jac);
  out.smallest_singular = svd.singularValues().minCoeff();
  out.weight_regularized = weight_regularized;
  out.n_obs = n_obs;
  return out;
}

}  // namespace supou
