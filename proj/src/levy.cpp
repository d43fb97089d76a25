#include "supou/levy.hpp"

#include <cmath>
#include <sstream>

#include "supou/errors.hpp"

namespace supou {

JumpLaw JumpLaw::exponential_mean(double mean) {
  JumpLaw law;
  law.kind = JumpKind::exponential;
  law.mean = mean;
  law.validate();
  return law;
}

JumpLaw JumpLaw::gamma_law(double shape, double scale) {
  JumpLaw law;
  law.kind = JumpKind::gamma;
  law.shape = shape;
  law.scale = scale;
  law.validate();
  return law;
}

void JumpLaw::validate() const {
  switch (kind) {
    case JumpKind::exponential:
      require(mean > 0.0, errc::contract, "exponential jump mean must be positive");
      return;
    case JumpKind::gamma:
      require(shape > 0.0 && scale > 0.0, errc::contract,
              "gamma jump shape and scale must be positive");
      return;
  }
  fail(errc::contract, "unknown jump law");
}

double JumpLaw::raw_moment(int n) const {
  require(n >= 1, errc::contract, "raw_moment order must be at least 1");
  switch (kind) {
    case JumpKind::exponential: {
      // E[x^n] = n! * mean^n
      double v = 1.0;
      for (int k = 1; k <= n; ++k) v *= k * mean;
      return v;
    }
    case JumpKind::gamma: {
      // E[x^n] = scale^n * shape (shape+1) ... (shape+n-1)
      double v = 1.0;
      for (int k = 0; k < n; ++k) v *= scale * (shape + k);
      return v;
    }
  }
  fail(errc::contract, "unknown jump law");
}

double JumpLaw::sample(Rng& rng) const {
  switch (kind) {
    case JumpKind::exponential:
      return rng.exponential(mean);
    case JumpKind::gamma:
      return rng.gamma(shape, scale);
  }
  fail(errc::contract, "unknown jump law");
}

void SubordinatorSpec::validate() const {
  require(gamma0 >= 0.0, errc::contract, "subordinator drift gamma0 must be nonnegative");
  require(jump_rate > 0.0, errc::contract, "jump rate must be positive");
  jump_law.validate();
}

void GammaMeanReversion::validate() const {
  require(B < 0.0, errc::contract, "mean-reversion scale B must be negative");
  require(alpha_pi > 2.0, errc::contract, "alpha_pi must exceed 2");
}

void ThetaParams::validate() const {
  require(mu >= 0.0, errc::contract, "theta: mu must be nonnegative");
  require(sigma2 > 0.0, errc::contract, "theta: sigma2 must be positive");
  require(alpha_pi > 2.0, errc::contract, "theta: alpha_pi must exceed 2");
  require(B < 0.0, errc::contract, "theta: B must be negative");
}

LevyCumulants levy_cumulants(const SubordinatorSpec& spec) {
  spec.validate();
  LevyCumulants c;
  const double lam = spec.jump_rate;
  c.mu = spec.gamma0 + lam * spec.jump_law.raw_moment(1);
  c.sigma2 = lam * spec.jump_law.raw_moment(2);
  c.m3 = lam * spec.jump_law.raw_moment(3);
  c.m4 = lam * spec.jump_law.raw_moment(4);
  c.skew = c.m3 / std::pow(c.sigma2, 1.5);
  c.kurt = c.m4 / (c.sigma2 * c.sigma2) + 3.0;
  return c;
}

ThetaParams theta_from_specs(const SubordinatorSpec& spec, const GammaMeanReversion& pi) {
  pi.validate();
  const LevyCumulants c = levy_cumulants(spec);
  ThetaParams theta;
  theta.mu = c.mu;
  theta.sigma2 = c.sigma2;
  theta.alpha_pi = pi.alpha_pi;
  theta.B = pi.B;
  theta.validate();
  return theta;
}

SubordinatorSpec exponential_subordinator(double mu, double sigma2) {
  require(mu > 0.0, errc::contract, "exponential_subordinator needs mu > 0");
  require(sigma2 > 0.0, errc::contract, "exponential_subordinator needs sigma2 > 0");
  SubordinatorSpec spec;
  spec.gamma0 = 0.0;
  spec.jump_rate = 2.0 * mu * mu / sigma2;
  spec.jump_law = JumpLaw::exponential_mean(sigma2 / (2.0 * mu));
  return spec;
}

namespace {

// Guard against windows whose expected event count cannot be materialized.
constexpr double kEventBudget = 2e8;

}  // namespace

EventSet sample_levy_events(const SubordinatorSpec& spec, const GammaMeanReversion& pi, double t0,
                            double t1, Rng& rng) {
  spec.validate();
  pi.validate();
  require(t0 <= t1, errc::contract, "event window must have t0 <= t1");

  const double expected = spec.jump_rate * (t1 - t0);
  if (expected > kEventBudget) {
    std::ostringstream os;
    os << "event window needs about " << expected << " events, beyond the budget of "
       << kEventBudget << "; shorten the window or lower the rate";
    fail(errc::resource, os.str());
  }

  EventSet set;
  set.t0 = t0;
  set.t1 = t1;
  set.events.reserve(static_cast<std::size_t>(expected + 4.0 * std::sqrt(expected) + 16.0));

  const double gap_mean = 1.0 / spec.jump_rate;
  double t = t0;
  for (;;) {
    t += rng.exponential(gap_mean);
    if (t > t1) break;
    Event e;
    e.s = t;
    e.x = spec.jump_law.sample(rng);
    e.a = pi.B * rng.gamma(pi.alpha_pi, 1.0);
    set.events.push_back(e);
  }
  return set;
}

}  // namespace supou
