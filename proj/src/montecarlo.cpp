#include "supou/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <thread>

#include "supou/analytics.hpp"
#include "supou/rng.hpp"
#include "supou/simulate.hpp"

namespace supou {

namespace {

constexpr std::array<const char*, 4> kParamNames = {"mu", "sigma2", "alpha_pi", "B"};

double component(const ThetaParams& t, int i) {
  switch (i) {
    case 0: return t.mu;
    case 1: return t.sigma2;
    case 2: return t.alpha_pi;
    default: return t.B;
  }
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct RepOutcome {
  std::optional<McRow> row;
  std::string error;
  errc kind = errc::numeric;
};

RepOutcome run_replication(const McConfig& cfg, std::size_t rep) {
  RepOutcome out;
  try {
    Rng rng = Rng::stream(cfg.seed, rep);
    std::vector<double> series;
    if (cfg.kind == MomentVector::Kind::returns) {
      series = simulate_returns(cfg.levy, cfg.pi, cfg.n, cfg.delta, cfg.sim_tol, rng, false).y;
    } else {
      series = simulate_supou_path(cfg.levy, cfg.pi, cfg.n, cfg.delta, cfg.sim_tol, rng).values;
    }
    GmmConfig gcfg;
    gcfg.kind = cfg.kind;
    gcfg.m = cfg.m;
    gcfg.delta = cfg.delta;
    gcfg.weighting = cfg.weighting;
    gcfg.optimizer = cfg.optimizer;
    gcfg.box = cfg.box;
    const GmmResult res = estimate(series, gcfg);
    McRow row;
    row.rep = rep;
    row.theta_hat = res.theta_hat;
    row.std_errors = res.std_errors;
    row.objective = res.objective;
    row.j_stat = res.j_stat;
    row.converged = res.converged;
    row.iterations = res.iterations;
    row.restart_index = res.restart_index;
    row.smallest_singular = res.smallest_singular;
    out.row = row;
  } catch (const Error& e) {
    out.error = e.what();
    out.kind = e.kind();
  } catch (const std::exception& e) {
    out.error = e.what();
    out.kind = errc::numeric;
  }
  return out;
}

}  // namespace

void McConfig::validate() const {
  levy.validate();
  pi.validate();
  require(replications >= 2, errc::contract, "at least two replications are required");
  require(n >= 1, errc::contract, "series length must be positive");
  require(delta > 0.0, errc::contract, "delta must be positive");
  require(sim_tol > 0.0 && sim_tol < 1.0, errc::contract, "sim_tol must be in (0, 1)");
  GmmConfig gcfg;
  gcfg.m = m;
  gcfg.delta = delta;
  gcfg.optimizer = optimizer;
  gcfg.box = box;
  gcfg.validate();
}

McReport run_monte_carlo(const McConfig& config) {
  config.validate();
  const ThetaParams truth = theta_from_specs(config.levy, config.pi);
  require(config.box.contains(truth), errc::contract,
          "the true parameter must lie inside the estimation box");

  McReport report;
  report.truth = truth;

  // Theoretical dispersion at the truth: the sandwich with the weight the
  // estimator converges to (identity, or the inverse long-run covariance for
  // either two-step variant).
  const LevyCumulants levycum = levy_cumulants(config.levy);
  const LagCovMatrix sigma =
      config.kind == MomentVector::Kind::returns
          ? w_sigma(truth, levycum, config.delta, config.m)
          : h_sigma(truth, levycum, config.delta, config.m);
  const JacobianMatrix g_jac = config.kind == MomentVector::Kind::returns
                                   ? jacobian_returns(truth, config.delta, config.m)
                                   : jacobian_supou(truth, config.delta, config.m);
  const long dim = static_cast<long>(config.m) + 2;
  const Eigen::MatrixXd a_weight = config.weighting == Weighting::identity
                                       ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(dim, dim))
                                       : floored_inverse(sigma.mat);
  const Eigen::Matrix4d theory_cov = asymptotic_cov(truth, a_weight, sigma, g_jac, config.n);
  for (int i = 0; i < 4; ++i) report.theory_se[i] = std::sqrt(std::max(theory_cov(i, i), 0.0));

  // Independent workers pull replication indices in order; results land in
  // index slots, so the reduction below is deterministic.
  const std::size_t workers = std::max<std::size_t>(
      1, std::min<std::size_t>(std::thread::hardware_concurrency(), config.replications));
  std::vector<RepOutcome> outcomes(config.replications);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  const auto worker = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::size_t rep = next.fetch_add(1, std::memory_order_relaxed);
      if (rep >= config.replications) break;
      outcomes[rep] = run_replication(config, rep);
      if (!outcomes[rep].row.has_value()) stop.store(true, std::memory_order_relaxed);
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::optional<std::size_t> first_failed;
  for (std::size_t r = 0; r < config.replications; ++r) {
    if (outcomes[r].row.has_value()) {
      report.rows.push_back(*outcomes[r].row);
    } else if (!outcomes[r].error.empty() && !first_failed.has_value()) {
      first_failed = r;
    }
  }
  if (first_failed.has_value()) {
    report.aborted = true;
    report.failed_rep = *first_failed;
    report.error_message = outcomes[*first_failed].error;
    report.error_kind = outcomes[*first_failed].kind;
    return report;
  }

  for (int i = 0; i < 4; ++i) {
    McComponent& c = report.summary[static_cast<std::size_t>(i)];
    c.name = kParamNames[static_cast<std::size_t>(i)];
    c.truth = component(truth, i);
    std::vector<double> values;
    values.reserve(report.rows.size());
    std::size_t hits = 0;
    for (const McRow& row : report.rows) {
      const double v = component(row.theta_hat, i);
      values.push_back(v);
      if (std::abs(v - c.truth) <= 1.96 * row.std_errors[i]) ++hits;
    }
    const double count = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= count;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    c.mean = mean;
    c.median = median_of(values);
    c.bias = mean - c.truth;
    c.emp_sd = std::sqrt(ss / (count - 1.0));
    c.theory_sd = report.theory_se[i];
    c.sd_ratio = c.theory_sd > 0.0 ? c.emp_sd / c.theory_sd : 0.0;
    c.coverage95 = static_cast<double>(hits) / count;
  }
  return report;
}

}  // namespace supou
