#pragma once

#include <cstddef>
#include <vector>

#include "supou/levy.hpp"

namespace supou {

// Smallest M with (1 - B*M)^(1 - alpha_pi) <= tol: jumps older than M carry
// at most a tol fraction of the stationary mean mass, which bounds the
// truncation bias of starting the event window at -M.
double truncation_horizon(const GammaMeanReversion& pi, double tol);

struct SupOUPath {
  double delta = 1.0;
  std::vector<double> values;  // X at Delta, 2*Delta, ..., N*Delta
  EventSet events;
  double horizon = 0.0;
  double truncation_tol = 0.0;
};

SupOUPath simulate_supou_path(const SubordinatorSpec& spec, const GammaMeanReversion& pi,
                              std::size_t n, double delta, double tol, Rng& rng);

// Deterministic kernel sums over a fixed event set: X at Delta, ..., N*Delta.
// The window must cover [0, N*Delta].
std::vector<double> evaluate_path(const EventSet& events, double gamma0,
                                  const GammaMeanReversion& pi, std::size_t n, double delta);

// Integrated volatility over each step interval [(t-1)*Delta, t*Delta].
std::vector<double> evaluate_integrated_vol(const EventSet& events, double gamma0,
                                            const GammaMeanReversion& pi, std::size_t n,
                                            double delta);

// Exact integral of X over [a,b] given the events: piecewise sums of decaying
// exponentials integrate in closed form, no grid quadrature involved.
double integrated_volatility(const EventSet& events, double gamma0, const GammaMeanReversion& pi,
                             double a, double b);

struct ReturnSeries {
  double delta = 1.0;
  std::vector<double> y;  // Y_1..Y_N
  std::vector<double> v;  // V_1..V_N, empty when retention is off
};

// Y_t = sqrt(V_t) * Z_t with V_t the integrated volatility over
// [(t-1)*Delta, t*Delta]; exact in law because the returns are independent
// centered Gaussians conditionally on the volatility path.
ReturnSeries simulate_returns(const SubordinatorSpec& spec, const GammaMeanReversion& pi,
                              std::size_t n, double delta, double tol, Rng& rng,
                              bool keep_volatility = true);

}  // namespace supou
