#include "supou/simulate.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "supou/errors.hpp"
#include "supou/kernels.hpp"

namespace supou {

double truncation_horizon(const GammaMeanReversion& pi, double tol) {
  pi.validate();
  require(tol > 0.0 && tol <= 1.0, errc::contract, "truncation tolerance must lie in (0,1]");
  const double m = (std::pow(tol, 1.0 / (1.0 - pi.alpha_pi)) - 1.0) / (-pi.B);
  return m < 0.0 ? 0.0 : m;
}

namespace {

// Active-event state advanced step by step. Each live event i keeps its
// current kernel value r[i] = x_i * exp(a_i * (t - s_i)); one Delta step
// multiplies by the cached decay d[i] = exp(a_i * Delta). Events whose value
// underflows past kDrop contribute nothing to any sum at double precision
// and are compacted away once they dominate the arrays.
constexpr double kDrop = 1e-250;
constexpr std::size_t kCompactEvery = 256;

struct ActiveEvents {
  std::vector<double> r, d, inv_a;
  std::size_t steps_since_compact = 0;
  double delta;

  explicit ActiveEvents(double step) : delta(step) {}

  void add(const Event& e, double now) {
    r.push_back(e.x * std::exp(e.a * (now - e.s)));
    d.push_back(std::exp(e.a * delta));
    inv_a.push_back(1.0 / e.a);
  }

  void maybe_compact() {
    if (++steps_since_compact < kCompactEvery) return;
    steps_since_compact = 0;
    std::size_t dead = 0;
    for (double v : r) dead += (v < kDrop);
    if (dead * 2 < r.size()) return;
    std::size_t w = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i] < kDrop) continue;
      r[w] = r[i];
      d[w] = d[i];
      inv_a[w] = inv_a[i];
      ++w;
    }
    r.resize(w);
    d.resize(w);
    inv_a.resize(w);
  }
};

void check_window(const EventSet& events, std::size_t n, double delta) {
  require(n >= 1, errc::contract, "path length must be at least 1");
  require(delta > 0.0, errc::contract, "sampling step delta must be positive");
  require(events.t0 <= 0.0 && events.t1 >= double(n) * delta, errc::contract,
          "event window does not cover [0, N*Delta]");
}

double drift_floor(double gamma0, const GammaMeanReversion& pi) {
  return -gamma0 / (pi.B * (pi.alpha_pi - 1.0));
}

}  // namespace

std::vector<double> evaluate_path(const EventSet& events, double gamma0,
                                  const GammaMeanReversion& pi, std::size_t n, double delta) {
  pi.validate();
  require(gamma0 >= 0.0, errc::contract, "gamma0 must be nonnegative");
  check_window(events, n, delta);

  const double floor = drift_floor(gamma0, pi);
  const auto& k = kernels::ops();

  ActiveEvents state(delta);
  const auto& ev = events.events;
  std::size_t next = 0;
  while (next < ev.size() && ev[next].s <= 0.0) state.add(ev[next++], 0.0);

  std::vector<double> values;
  values.reserve(n);
  for (std::size_t t = 1; t <= n; ++t) {
    const double now = double(t) * delta;
    double sum = k.decay_sum(state.r.data(), state.d.data(), state.r.size());
    while (next < ev.size() && ev[next].s <= now) {
      state.add(ev[next++], now);
      sum += state.r.back();
    }
    values.push_back(floor + sum);
    state.maybe_compact();
  }
  return values;
}

std::vector<double> evaluate_integrated_vol(const EventSet& events, double gamma0,
                                            const GammaMeanReversion& pi, std::size_t n,
                                            double delta) {
  pi.validate();
  require(gamma0 >= 0.0, errc::contract, "gamma0 must be nonnegative");
  check_window(events, n, delta);

  const double floor = drift_floor(gamma0, pi);
  const auto& k = kernels::ops();

  ActiveEvents state(delta);
  const auto& ev = events.events;
  std::size_t next = 0;
  while (next < ev.size() && ev[next].s <= 0.0) state.add(ev[next++], 0.0);

  std::vector<double> vols;
  vols.reserve(n);
  for (std::size_t t = 1; t <= n; ++t) {
    const double now = double(t) * delta;
    double vol = floor * delta +
                 k.decay_vol(state.r.data(), state.d.data(), state.inv_a.data(), state.r.size());
    while (next < ev.size() && ev[next].s <= now) {
      const Event& e = ev[next++];
      state.add(e, now);
      vol += (state.r.back() - e.x) / e.a;
    }
    vols.push_back(vol);
    state.maybe_compact();
  }
  return vols;
}

SupOUPath simulate_supou_path(const SubordinatorSpec& spec, const GammaMeanReversion& pi,
                              std::size_t n, double delta, double tol, Rng& rng) {
  spec.validate();
  pi.validate();
  require(n >= 1, errc::contract, "path length must be at least 1");
  require(delta > 0.0, errc::contract, "sampling step delta must be positive");

  SupOUPath path;
  path.delta = delta;
  path.truncation_tol = tol;
  path.horizon = truncation_horizon(pi, tol);
  path.events = sample_levy_events(spec, pi, -path.horizon, double(n) * delta, rng);
  path.values = evaluate_path(path.events, spec.gamma0, pi, n, delta);
  return path;
}

double integrated_volatility(const EventSet& events, double gamma0, const GammaMeanReversion& pi,
                             double a, double b) {
  pi.validate();
  require(gamma0 >= 0.0, errc::contract, "gamma0 must be nonnegative");
  require(a < b, errc::contract, "volatility interval must have a < b");
  require(events.t0 <= a && b <= events.t1, errc::contract,
          "event window does not cover the requested interval; rebuild the event set with "
          "enough stationary past");

  double v = drift_floor(gamma0, pi) * (b - a);
  for (const Event& e : events.events) {
    if (e.s >= b) break;
    const double upper = std::exp(e.a * (b - e.s));
    const double lower = e.s > a ? 1.0 : std::exp(e.a * (a - e.s));
    v += e.x * (upper - lower) / e.a;
  }
  return v;
}

ReturnSeries simulate_returns(const SubordinatorSpec& spec, const GammaMeanReversion& pi,
                              std::size_t n, double delta, double tol, Rng& rng,
                              bool keep_volatility) {
  spec.validate();
  pi.validate();
  require(n >= 1, errc::contract, "series length must be at least 1");
  require(delta > 0.0, errc::contract, "sampling step delta must be positive");

  const double horizon = truncation_horizon(pi, tol);
  const EventSet events = sample_levy_events(spec, pi, -horizon, double(n) * delta, rng);
  std::vector<double> vols = evaluate_integrated_vol(events, spec.gamma0, pi, n, delta);

  for (std::size_t t = 0; t < n; ++t) {
    if (!(vols[t] > 0.0)) {
      fail(errc::numeric,
           "degenerate volatility: integrated variance is zero on step " + std::to_string(t + 1) +
               "; the subordinator must have positive drift or positive jump rate");
    }
  }

  ReturnSeries series;
  series.delta = delta;
  series.y.reserve(n);
  for (std::size_t t = 0; t < n; ++t) series.y.push_back(std::sqrt(vols[t]) * rng.normal());
  if (keep_volatility) series.v = std::move(vols);
  return series;
}

}  // namespace supou
