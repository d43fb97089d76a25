#pragma once

#include <cstddef>
#include <vector>

#include "supou/rng.hpp"

namespace supou {

enum class JumpKind { exponential, gamma };

// Positive jump law of the compound-Poisson subordinator. Any law usable here
// must provide its first four raw moments in closed form and a sampler; the
// two shipped laws satisfy that for every order.
struct JumpLaw {
  JumpKind kind = JumpKind::exponential;
  double mean = 1.0;   // exponential
  double shape = 1.0;  // gamma
  double scale = 1.0;  // gamma

  static JumpLaw exponential_mean(double mean);
  static JumpLaw gamma_law(double shape, double scale);

  void validate() const;
  // E[x^n] for n >= 1.
  double raw_moment(int n) const;
  double sample(Rng& rng) const;
};

// Finite-variation subordinator basis: drift gamma0 plus compound-Poisson
// jumps of intensity jump_rate with law jump_law.
struct SubordinatorSpec {
  double gamma0 = 0.0;
  double jump_rate = 1.0;
  JumpLaw jump_law = {};

  void validate() const;
};

// Mean-reversion mixture A = B * xi with xi ~ Gamma(alpha_pi, 1).
struct GammaMeanReversion {
  double B = -1.0;
  double alpha_pi = 3.0;

  void validate() const;
};

struct LevyCumulants {
  double mu = 0.0;      // E[L_1]
  double sigma2 = 0.0;  // Var[L_1]
  double m3 = 0.0;      // third cumulant, s * sigma^3
  double m4 = 0.0;      // fourth cumulant, (eta - 3) * sigma^4
  double skew = 0.0;
  double kurt = 0.0;    // eta, full kurtosis
};

// Parameter vector theta = (mu, sigma2, alpha_pi, B); both simulation truth
// and GMM estimand.
struct ThetaParams {
  double mu = 0.0;
  double sigma2 = 1.0;
  double alpha_pi = 3.0;
  double B = -1.0;

  void validate() const;
};

LevyCumulants levy_cumulants(const SubordinatorSpec& spec);

ThetaParams theta_from_specs(const SubordinatorSpec& spec, const GammaMeanReversion& pi);

// Canonical driftless exponential-jump subordinator matching a target mean
// and variance: rate 2 mu^2 / sigma2, jump mean sigma2 / (2 mu). Used by the
// Monte Carlo driver and the CLI when only theta is given.
SubordinatorSpec exponential_subordinator(double mu, double sigma2);

struct Event {
  double s;  // arrival time
  double x;  // jump size, > 0
  double a;  // mean reversion, < 0
};

struct EventSet {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<Event> events;  // sorted by time
};

// Poisson(rate * (t1 - t0)) events with i.i.d. sizes and reversions, sorted
// by time. A window of zero length yields an empty set; a reversed window is
// a contract error.
EventSet sample_levy_events(const SubordinatorSpec& spec, const GammaMeanReversion& pi, double t0,
                            double t1, Rng& rng);

}  // namespace supou
