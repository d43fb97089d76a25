// Command-line front end: simulate, moments, weakdep, estimate, montecarlo.
// Configuration comes from key-value files plus flag overrides; every report
// gets a JSON sidecar embedding the resolved configuration, and all outputs
// are deterministic functions of (config, seed).

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "supou/analytics.hpp"
#include "supou/empirics.hpp"
#include "supou/errors.hpp"
#include "supou/gmm.hpp"
#include "supou/levy.hpp"
#include "supou/montecarlo.hpp"
#include "supou/rng.hpp"
#include "supou/simulate.hpp"
#include "supou/weakdep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace supou::cli {

constexpr const char* kToolVersion = "1.0.0";

std::string fmt(double v, const char* spec = "%.12g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

double parse_double(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  require(!s.empty() && pos == s.size(), errc::contract,
          "config key '" + key + "' must be a number (got '" + s + "')");
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  require(!s.empty() && s[0] != '-' && pos == s.size(), errc::contract,
          "config key '" + key + "' must be a nonnegative integer (got '" + s + "')");
  return v;
}

struct RunConfig {
  std::string subcommand;
  std::map<std::string, std::string> kv;

  bool has(const std::string& key) const { return kv.find(key) != kv.end(); }
  const std::string& require_str(const std::string& key) const {
    auto it = kv.find(key);
    require(it != kv.end(), errc::contract, "config key '" + key + "' is required");
    return it->second;
  }
  std::string get_str(const std::string& key, const std::string& def) const {
    auto it = kv.find(key);
    return it == kv.end() ? def : it->second;
  }
  double require_double(const std::string& key) const {
    return parse_double(key, require_str(key));
  }
  double get_double(const std::string& key, double def) const {
    auto it = kv.find(key);
    return it == kv.end() ? def : parse_double(key, it->second);
  }
  std::uint64_t require_unsigned(const std::string& key) const {
    return parse_unsigned(key, require_str(key));
  }
  std::uint64_t get_unsigned(const std::string& key, std::uint64_t def) const {
    auto it = kv.find(key);
    return it == kv.end() ? def : parse_unsigned(key, it->second);
  }
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

void load_config_file(const std::string& path, std::map<std::string, std::string>& kv) {
  std::ifstream in(path);
  require(in.good(), errc::io, "failed to open config file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, errc::contract,
            "config file " + path + " line " + std::to_string(lineno) +
                ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), errc::contract,
            "config file " + path + " line " + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
}

void apply_set(const std::string& item, std::map<std::string, std::string>& kv) {
  const auto eq = item.find('=');
  require(eq != std::string::npos && eq > 0, errc::contract,
          "--set expects key=value (got '" + item + "')");
  kv[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), errc::io, "failed to open output file: " + path.string());
  out << content;
  out.flush();
  require(out.good(), errc::io, "failed to write output file: " + path.string());
}

fs::path prepare_out_dir(const RunConfig& rc) {
  const fs::path dir = rc.get_str("out", ".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), errc::io,
          "failed to create output directory: " + dir.string());
  return dir;
}

json meta_base(const RunConfig& rc) {
  json j;
  j["tool_version"] = kToolVersion;
  j["subcommand"] = rc.subcommand;
  j["config"] = rc.kv;
  return j;
}

json theta_json(const ThetaParams& t) {
  json j;
  j["mu"] = t.mu;
  j["sigma2"] = t.sigma2;
  j["alpha_pi"] = t.alpha_pi;
  j["B"] = t.B;
  return j;
}

SubordinatorSpec levy_from(const RunConfig& rc) {
  SubordinatorSpec s;
  s.gamma0 = rc.get_double("levy.gamma0", 0.0);
  s.jump_rate = rc.get_double("levy.rate", 1.0);
  const std::string kind = rc.get_str("levy.jump", "exponential");
  if (kind == "exponential") {
    s.jump_law = JumpLaw::exponential_mean(rc.get_double("levy.jump_mean", 1.0));
  } else if (kind == "gamma") {
    const double shape = rc.get_double("levy.jump_shape", 1.0);
    const double mean = rc.get_double("levy.jump_mean", 1.0);
    require(shape > 0.0, errc::contract, "config key 'levy.jump_shape' must be positive");
    require(mean > 0.0, errc::contract, "config key 'levy.jump_mean' must be positive");
    s.jump_law = JumpLaw::gamma_law(shape, mean / shape);
  } else {
    fail(errc::contract, "config key 'levy.jump' must be 'exponential' or 'gamma'");
  }
  s.validate();
  return s;
}

GammaMeanReversion pi_from(const RunConfig& rc) {
  GammaMeanReversion pi;
  pi.B = rc.require_double("pi.B");
  pi.alpha_pi = rc.require_double("pi.alpha_pi");
  pi.validate();
  return pi;
}

std::uint64_t required_seed(const RunConfig& rc) {
  require(rc.has("seed"), errc::contract,
          "config key 'seed' is required for stochastic subcommands");
  return rc.require_unsigned("seed");
}

MomentVector::Kind kind_from(const RunConfig& rc) {
  const std::string kind = rc.get_str("kind", "supou");
  if (kind == "supou") return MomentVector::Kind::supou;
  if (kind == "returns") return MomentVector::Kind::returns;
  fail(errc::contract, "config key 'kind' must be 'supou' or 'returns'");
}

Weighting weighting_from(const RunConfig& rc) {
  const std::string w = rc.get_str("weighting", "identity");
  if (w == "identity") return Weighting::identity;
  if (w == "two_step_hac") return Weighting::two_step_hac;
  if (w == "two_step_theory") return Weighting::two_step_theory;
  fail(errc::contract,
       "config key 'weighting' must be 'identity', 'two_step_hac', or 'two_step_theory'");
}

std::size_t lag_count_from(const RunConfig& rc, std::size_t def) {
  const std::uint64_t m = rc.get_unsigned("m", def);
  return static_cast<std::size_t>(m);
}

// ---------------------------------------------------------------------------
// simulate

int run_simulate(const RunConfig& rc) {
  const SubordinatorSpec spec = levy_from(rc);
  const GammaMeanReversion pi = pi_from(rc);
  const std::uint64_t seed = required_seed(rc);
  const std::uint64_t n64 = rc.require_unsigned("N");
  require(n64 >= 1, errc::contract, "config key 'N' must be a positive integer");
  const std::size_t n = static_cast<std::size_t>(n64);
  const double delta = rc.get_double("delta", 1.0);
  const double tol = rc.get_double("tol", 1e-6);
  const MomentVector::Kind kind = kind_from(rc);
  const fs::path dir = prepare_out_dir(rc);

  Rng rng = Rng::stream(seed, 0);
  std::string csv;
  if (kind == MomentVector::Kind::supou) {
    const SupOUPath path = simulate_supou_path(spec, pi, n, delta, tol, rng);
    csv = "t,value\n";
    for (std::size_t t = 0; t < n; ++t) {
      csv += std::to_string(t + 1);
      csv += ',';
      csv += fmt(path.values[t], "%.17g");
      csv += '\n';
    }
  } else {
    const ReturnSeries rs = simulate_returns(spec, pi, n, delta, tol, rng, true);
    csv = "t,Y,V\n";
    for (std::size_t t = 0; t < n; ++t) {
      csv += std::to_string(t + 1);
      csv += ',';
      csv += fmt(rs.y[t], "%.17g");
      csv += ',';
      csv += fmt(rs.v[t], "%.17g");
      csv += '\n';
    }
  }
  write_text(dir / "series.csv", csv);

  json meta = meta_base(rc);
  meta["theta0"] = theta_json(theta_from_specs(spec, pi));
  meta["seed"] = seed;
  meta["N"] = n;
  meta["delta"] = delta;
  meta["tol"] = tol;
  meta["kind"] = kind == MomentVector::Kind::returns ? "returns" : "supou";
  meta["truncation_horizon"] = truncation_horizon(pi, tol);
  write_text(dir / "series.meta.json", meta.dump(2) + "\n");
  std::printf("wrote %s (%zu rows)\n", (dir / "series.csv").string().c_str(), n);
  return 0;
}

// ---------------------------------------------------------------------------
// moments

std::string square_csv(const Eigen::MatrixXd& m) {
  std::string csv;
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      if (j > 0) csv += ',';
      csv += fmt(m(i, j));
    }
    csv += '\n';
  }
  return csv;
}

int run_moments(const RunConfig& rc) {
  const SubordinatorSpec spec = levy_from(rc);
  const GammaMeanReversion pi = pi_from(rc);
  const ThetaParams theta = theta_from_specs(spec, pi);
  const LevyCumulants levy = levy_cumulants(spec);
  const std::size_t m = lag_count_from(rc, 6);
  const double delta = rc.get_double("delta", 1.0);
  const std::string with_sigma = rc.get_str("with_sigma", "none");
  require(with_sigma == "none" || with_sigma == "h" || with_sigma == "w" || with_sigma == "both",
          errc::contract, "config key 'with_sigma' must be 'none', 'h', 'w', or 'both'");
  const fs::path dir = prepare_out_dir(rc);

  const MomentSet ms = supou_moments(theta, delta, m);
  const MomentSet rs = returns_moments(theta, delta, m);

  std::string csv = "name,value\n";
  csv += "C," + fmt(ms.mean) + "\n";
  for (std::size_t k = 0; k <= m; ++k) {
    csv += "D(" + std::to_string(k) + ")," + fmt(ms.autocov[k]) + "\n";
  }
  csv += "C_star," + fmt(rs.mean) + "\n";
  for (std::size_t k = 1; k <= m; ++k) {
    csv += "D_star(" + std::to_string(k) + ")," + fmt(rs.autocov[k]) + "\n";
  }
  csv += "var_Y2," + fmt(rs.variance) + "\n";
  csv += "kappa3," + fmt(cum3(theta, levy.m3, delta, {0.0, 0.0, 0.0})) + "\n";
  csv += "kappa4," + fmt(cum4(theta, levy.m4, delta, {0.0, 0.0, 0.0, 0.0})) + "\n";
  write_text(dir / "moments.csv", csv);

  json meta = meta_base(rc);
  meta["theta"] = theta_json(theta);
  meta["m"] = m;
  meta["delta"] = delta;
  if (with_sigma == "h" || with_sigma == "both") {
    const LagCovMatrix h = h_sigma(theta, levy, delta, m);
    write_text(dir / "h_sigma.csv", square_csv(h.mat));
    meta["h_sigma_lag_cutoff"] = h.lag_cutoff;
  }
  if (with_sigma == "w" || with_sigma == "both") {
    const LagCovMatrix w = w_sigma(theta, levy, delta, m);
    write_text(dir / "w_sigma.csv", square_csv(w.mat));
    meta["w_sigma_lag_cutoff"] = w.lag_cutoff;
  }
  write_text(dir / "moments.meta.json", meta.dump(2) + "\n");
  std::printf("wrote %s\n", (dir / "moments.csv").string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// weakdep

int run_weakdep(const RunConfig& rc) {
  const SubordinatorSpec spec = levy_from(rc);
  const GammaMeanReversion pi = pi_from(rc);
  ThetaParams theta = theta_from_specs(spec, pi);
  const std::string variant = rc.get_str("variant", "subordinator_l2");
  const double delta = rc.get_double("delta", 1.0);
  const double delta_moment = rc.get_double("delta_moment", 1.0);
  const double r_min = rc.get_double("r_min", 1.0);
  const double r_max = rc.get_double("r_max", 50.0);
  const std::uint64_t points = rc.get_unsigned("points", 25);
  require(points >= 2, errc::contract, "config key 'points' must be at least 2");
  require(r_min > 0.0 && r_max > r_min, errc::contract,
          "config keys 'r_min'/'r_max' must satisfy 0 < r_min < r_max");
  const fs::path dir = prepare_out_dir(rc);

  std::vector<double> radii(points);
  for (std::size_t i = 0; i < points; ++i) {
    radii[i] = r_min + (r_max - r_min) * static_cast<double>(i) /
                           static_cast<double>(points - 1);
  }

  CoefficientCurve curve;
  if (variant == "returns") {
    curve = coefficient_curve_returns(theta, delta, radii);
  } else if (variant == "zero_mean") {
    // The zero-mean coefficient describes the centered process, so the mean
    // component is removed before evaluation.
    theta.mu = 0.0;
    curve = coefficient_curve_supou(theta, SupouThetaVariant::zero_mean, radii);
  } else if (variant == "general") {
    curve = coefficient_curve_supou(theta, SupouThetaVariant::general, radii);
  } else if (variant == "subordinator_linf") {
    curve = coefficient_curve_supou(theta, SupouThetaVariant::subordinator_linf, radii);
  } else if (variant == "subordinator_l2") {
    curve = coefficient_curve_supou(theta, SupouThetaVariant::subordinator_l2, radii);
  } else {
    fail(errc::contract,
         "config key 'variant' must be one of zero_mean, general, subordinator_linf, "
         "subordinator_l2, returns");
  }

  std::string csv = "r,coefficient\n";
  for (const auto& [r, value] : curve.points) {
    csv += fmt(r) + "," + fmt(value) + "\n";
  }
  write_text(dir / "weakdep_curve.csv", csv);

  const double slope = loglog_slope(curve);
  const double decay = -slope;
  std::string gates = "theorem,delta_moment,threshold,decay_exponent,pass\n";
  for (const std::string& id : clt_gate_catalog()) {
    const GateResult g = clt_gate(id, delta_moment, decay);
    gates += g.theorem + "," + fmt(g.delta_moment) + "," + fmt(g.threshold) + "," +
             fmt(g.decay_exponent) + "," + (g.pass ? "true" : "false") + "\n";
  }
  write_text(dir / "weakdep_gates.csv", gates);

  json meta = meta_base(rc);
  meta["theta"] = theta_json(theta);
  meta["variant"] = curve.variant;
  meta["loglog_slope"] = slope;
  meta["decay_exponent"] = decay;
  meta["delta_moment"] = delta_moment;
  write_text(dir / "weakdep.meta.json", meta.dump(2) + "\n");
  std::printf("wrote %s and %s (decay exponent %s)\n",
              (dir / "weakdep_curve.csv").string().c_str(),
              (dir / "weakdep_gates.csv").string().c_str(), fmt(decay, "%.6g").c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// estimate

std::vector<double> read_series_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), errc::io, "failed to open input file: " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), errc::io, "input file is empty: " + path);
  require(!line.empty() && (line[0] == 't' || line[0] == 'T'), errc::io,
          "unrecognized CSV header in " + path + " (expected 't,value' or 't,Y[,V]')");
  std::vector<double> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto c1 = line.find(',');
    require(c1 != std::string::npos, errc::io,
            path + " line " + std::to_string(lineno) + ": expected at least two columns");
    auto c2 = line.find(',', c1 + 1);
    if (c2 == std::string::npos) c2 = line.size();
    const std::string field = trim(line.substr(c1 + 1, c2 - c1 - 1));
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(field, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    require(pos == field.size() && !field.empty() && std::isfinite(v), errc::io,
            path + " line " + std::to_string(lineno) + ": malformed value '" + field + "'");
    out.push_back(v);
  }
  return out;
}

int run_estimate(const RunConfig& rc) {
  const std::string input = rc.require_str("input");
  const std::vector<double> data = read_series_csv(input);
  GmmConfig cfg;
  cfg.kind = kind_from(rc);
  cfg.m = lag_count_from(rc, 6);
  cfg.delta = rc.get_double("delta", 1.0);
  cfg.weighting = weighting_from(rc);
  if (rc.has("seed")) cfg.optimizer.jitter_seed = rc.require_unsigned("seed");
  const fs::path dir = prepare_out_dir(rc);

  const GmmResult res = estimate(data, cfg);

  std::string csv = "parameter,estimate,std_error\n";
  const std::array<const char*, 4> names = {"mu", "sigma2", "alpha_pi", "B"};
  const std::array<double, 4> values = {res.theta_hat.mu, res.theta_hat.sigma2,
                                        res.theta_hat.alpha_pi, res.theta_hat.B};
  for (int i = 0; i < 4; ++i) {
    csv += std::string(names[static_cast<std::size_t>(i)]) + "," + fmt(values[static_cast<std::size_t>(i)]) +
           "," + fmt(res.std_errors[i]) + "\n";
  }
  write_text(dir / "estimate.csv", csv);

  json meta = meta_base(rc);
  meta["theta_hat"] = theta_json(res.theta_hat);
  meta["std_errors"] = {res.std_errors[0], res.std_errors[1], res.std_errors[2],
                        res.std_errors[3]};
  meta["objective"] = res.objective;
  meta["j_stat"] = res.j_stat;
  meta["converged"] = res.converged;
  meta["iterations"] = res.iterations;
  meta["restart_index"] = res.restart_index;
  meta["smallest_singular"] = res.smallest_singular;
  meta["weight_regularized"] = res.weight_regularized;
  meta["n_obs"] = res.n_obs;
  write_text(dir / "estimate.meta.json", meta.dump(2) + "\n");

  std::printf("estimate (kind=%s, m=%zu, weighting=%s, N=%zu)\n",
              rc.get_str("kind", "supou").c_str(), cfg.m, to_string(cfg.weighting).c_str(),
              res.n_obs);
  for (int i = 0; i < 4; ++i) {
    std::printf("  %-9s = %-14s (se %s)\n", names[static_cast<std::size_t>(i)],
                fmt(values[static_cast<std::size_t>(i)], "%.8g").c_str(),
                fmt(res.std_errors[i], "%.4g").c_str());
  }
  std::printf("  objective = %s   J-statistic = %s\n", fmt(res.objective, "%.8g").c_str(),
              fmt(res.j_stat, "%.8g").c_str());
  std::printf("  converged = %s   iterations = %zu   restart = %zu\n",
              res.converged ? "yes" : "no", res.iterations, res.restart_index);
  std::printf("  smallest Jacobian singular value = %s\n",
              fmt(res.smallest_singular, "%.4g").c_str());
  std::printf("wrote %s\n", (dir / "estimate.csv").string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// montecarlo

int run_montecarlo(const RunConfig& rc) {
  McConfig cfg;
  cfg.levy = levy_from(rc);
  cfg.pi = pi_from(rc);
  cfg.kind = kind_from(rc);
  const std::uint64_t n64 = rc.require_unsigned("N");
  require(n64 >= 1, errc::contract, "config key 'N' must be a positive integer");
  cfg.n = static_cast<std::size_t>(n64);
  cfg.delta = rc.get_double("delta", 1.0);
  cfg.m = lag_count_from(rc, 6);
  cfg.weighting = weighting_from(rc);
  cfg.replications = static_cast<std::size_t>(rc.require_unsigned("replications"));
  cfg.seed = required_seed(rc);
  cfg.sim_tol = rc.get_double("tol", 1e-6);
  const fs::path dir = prepare_out_dir(rc);

  const McReport report = run_monte_carlo(cfg);

  std::string rows =
      "rep,mu,sigma2,alpha_pi,B,se_mu,se_sigma2,se_alpha_pi,se_B,objective,j_stat,"
      "converged,iterations,restart_index,smallest_singular\n";
  for (const McRow& r : report.rows) {
    rows += std::to_string(r.rep) + "," + fmt(r.theta_hat.mu) + "," + fmt(r.theta_hat.sigma2) +
            "," + fmt(r.theta_hat.alpha_pi) + "," + fmt(r.theta_hat.B) + "," +
            fmt(r.std_errors[0]) + "," + fmt(r.std_errors[1]) + "," + fmt(r.std_errors[2]) +
            "," + fmt(r.std_errors[3]) + "," + fmt(r.objective) + "," + fmt(r.j_stat) + "," +
            (r.converged ? "true" : "false") + "," + std::to_string(r.iterations) + "," +
            std::to_string(r.restart_index) + "," + fmt(r.smallest_singular) + "\n";
  }

  if (report.aborted) {
    const fs::path partial = dir / "mc_estimates.partial.csv";
    write_text(partial, rows);
    fail(report.error_kind, "replication " + std::to_string(report.failed_rep) +
                                " failed: " + report.error_message +
                                "; partial results at " + partial.string());
  }

  write_text(dir / "mc_estimates.csv", rows);

  std::string summary = "parameter,truth,mean,median,bias,emp_sd,theory_sd,sd_ratio,coverage95\n";
  for (const McComponent& c : report.summary) {
    summary += c.name + "," + fmt(c.truth) + "," + fmt(c.mean) + "," + fmt(c.median) + "," +
               fmt(c.bias) + "," + fmt(c.emp_sd) + "," + fmt(c.theory_sd) + "," +
               fmt(c.sd_ratio) + "," + fmt(c.coverage95) + "\n";
  }
  write_text(dir / "mc_summary.csv", summary);

  json meta = meta_base(rc);
  meta["theta0"] = theta_json(report.truth);
  meta["replications"] = cfg.replications;
  meta["N"] = cfg.n;
  meta["theory_se"] = {report.theory_se[0], report.theory_se[1], report.theory_se[2],
                       report.theory_se[3]};
  write_text(dir / "montecarlo.meta.json", meta.dump(2) + "\n");

  std::printf("monte carlo: %zu replications at N=%zu (kind=%s, weighting=%s)\n",
              cfg.replications, cfg.n, rc.get_str("kind", "supou").c_str(),
              to_string(cfg.weighting).c_str());
  std::printf("  %-9s %12s %12s %12s %10s %10s %9s %10s\n", "param", "truth", "mean", "bias",
              "emp_sd", "theory_sd", "ratio", "coverage");
  for (const McComponent& c : report.summary) {
    std::printf("  %-9s %12.6g %12.6g %12.4g %10.4g %10.4g %9.3f %10.3f\n", c.name.c_str(),
                c.truth, c.mean, c.bias, c.emp_sd, c.theory_sd, c.sd_ratio, c.coverage95);
  }
  std::printf("wrote %s and %s\n", (dir / "mc_estimates.csv").string().c_str(),
              (dir / "mc_summary.csv").string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// dispatch

struct FlagBinding {
  CLI::App* cmd;
  std::string flag;
  std::string key;
  std::string help;
};

int run(int argc, char** argv) {
  CLI::App app{"supOU process and stochastic-volatility toolkit: exact simulation, "
               "closed-form moments, weak-dependence reports, and moment estimation"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::vector<std::string> config_files;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flag_values;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_files, "key-value config file (repeatable)");
    cmd->add_option("--set", sets, "override a config key: --set key=value (repeatable)");
  };
  const auto bind = [&](CLI::App* cmd, const std::string& flag, const std::string& key,
                        const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [&flag_values, key](const std::string& v) { flag_values[key] = v; }, help);
  };
  const auto bind_model = [&](CLI::App* cmd) {
    bind(cmd, "--levy.gamma0", "levy.gamma0", "subordinator drift (default 0)");
    bind(cmd, "--levy.rate", "levy.rate", "jump intensity (default 1)");
    bind(cmd, "--levy.jump", "levy.jump", "jump law: exponential | gamma");
    bind(cmd, "--levy.jump_mean", "levy.jump_mean", "mean jump size (default 1)");
    bind(cmd, "--levy.jump_shape", "levy.jump_shape", "gamma jump shape (default 1)");
    bind(cmd, "--pi.B", "pi.B", "mean-reversion scale B < 0 (required)");
    bind(cmd, "--pi.alpha_pi", "pi.alpha_pi", "mixing tail index alpha_pi (required)");
  };
  const auto bind_out_seed = [&](CLI::App* cmd, bool with_seed) {
    bind(cmd, "--out", "out", "output directory (default .)");
    if (with_seed) bind(cmd, "--seed", "seed", "random seed");
  };

  CLI::App* sim = app.add_subcommand("simulate", "simulate a supOU path or return series");
  add_common(sim);
  bind_model(sim);
  bind_out_seed(sim, true);
  bind(sim, "--kind", "kind", "series kind: supou | returns (default supou)");
  bind(sim, "--N", "N", "number of observations (required)");
  bind(sim, "--delta", "delta", "observation spacing (default 1)");
  bind(sim, "--tol", "tol", "truncation tolerance (default 1e-6)");

  CLI::App* mom = app.add_subcommand("moments", "closed-form moments and cumulants");
  add_common(mom);
  bind_model(mom);
  bind_out_seed(mom, false);
  bind(mom, "--m", "m", "number of lags (default 6)");
  bind(mom, "--delta", "delta", "observation spacing (default 1)");
  bind(mom, "--with-sigma", "with_sigma", "also write long-run covariances: none|h|w|both");

  CLI::App* wd = app.add_subcommand("weakdep", "weak-dependence coefficients and limit gates");
  add_common(wd);
  bind_model(wd);
  bind_out_seed(wd, false);
  bind(wd, "--variant", "variant",
       "coefficient variant: zero_mean | general | subordinator_linf | subordinator_l2 | "
       "returns (default subordinator_l2)");
  bind(wd, "--delta", "delta", "observation spacing for the returns variant (default 1)");
  bind(wd, "--delta-moment", "delta_moment", "moment surplus delta for the gate table (default 1)");
  bind(wd, "--r-min", "r_min", "smallest radius (default 1)");
  bind(wd, "--r-max", "r_max", "largest radius (default 50)");
  bind(wd, "--points", "points", "grid size (default 25)");

  CLI::App* est = app.add_subcommand("estimate", "GMM estimation from a series CSV");
  add_common(est);
  bind_out_seed(est, true);
  bind(est, "--input", "input", "input series CSV (required)");
  bind(est, "--kind", "kind", "series kind: supou | returns (default supou)");
  bind(est, "--m", "m", "number of lags (default 6)");
  bind(est, "--weighting", "weighting", "identity | two_step_hac | two_step_theory");
  bind(est, "--delta", "delta", "observation spacing (default 1)");

  CLI::App* mc = app.add_subcommand("montecarlo", "replicated simulate-then-estimate study");
  add_common(mc);
  bind_model(mc);
  bind_out_seed(mc, true);
  bind(mc, "--kind", "kind", "series kind: supou | returns (default supou)");
  bind(mc, "--N", "N", "observations per replication (required)");
  bind(mc, "--delta", "delta", "observation spacing (default 1)");
  bind(mc, "--m", "m", "number of lags (default 6)");
  bind(mc, "--weighting", "weighting", "identity | two_step_hac | two_step_theory");
  bind(mc, "--replications", "replications", "number of replications (required, >= 2)");
  bind(mc, "--tol", "tol", "truncation tolerance (default 1e-6)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  RunConfig rc;
  for (const std::string& path : config_files) load_config_file(path, rc.kv);
  for (const std::string& item : sets) apply_set(item, rc.kv);
  for (const auto& [key, value] : flag_values) rc.kv[key] = value;

  if (sim->parsed()) rc.subcommand = "simulate";
  if (mom->parsed()) rc.subcommand = "moments";
  if (wd->parsed()) rc.subcommand = "weakdep";
  if (est->parsed()) rc.subcommand = "estimate";
  if (mc->parsed()) rc.subcommand = "montecarlo";

  if (rc.subcommand == "simulate") return run_simulate(rc);
  if (rc.subcommand == "moments") return run_moments(rc);
  if (rc.subcommand == "weakdep") return run_weakdep(rc);
  if (rc.subcommand == "estimate") return run_estimate(rc);
  if (rc.subcommand == "montecarlo") return run_montecarlo(rc);
  fail(errc::contract, "a subcommand is required");
}

}  // namespace supou::cli

int main(int argc, char** argv) {
  try {
    return supou::cli::run(argc, argv);
  } catch (const supou::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.kind()) {
      case supou::errc::contract: return 2;
      case supou::errc::numeric: return 3;
      case supou::errc::resource:
      case supou::errc::io: return 4;
    }
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 3;
  }
}
