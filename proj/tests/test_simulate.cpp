#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numeric>
#include <vector>

#include "supou/errors.hpp"
#include "supou/levy.hpp"
#include "supou/simulate.hpp"

using namespace supou;

TEST_CASE("truncation horizon solves the mass equation") {
  REQUIRE(truncation_horizon({-1.0, 4.0}, 1e-6) == Catch::Approx(99.0).epsilon(1e-12));
  REQUIRE(truncation_horizon({-0.5, 3.0}, 1e-4) == Catch::Approx(198.0).epsilon(1e-12));
  REQUIRE(truncation_horizon({-1.0, 4.0}, 1.0) == 0.0);
  REQUIRE_THROWS_AS(truncation_horizon({-1.0, 4.0}, 0.0), Error);
  REQUIRE_THROWS_AS(truncation_horizon({-1.0, 4.0}, 1.5), Error);

  // definition check: (1 - B*M)^(1-alpha) == tol at the returned M
  const double m = truncation_horizon({-0.7, 3.3}, 1e-5);
  REQUIRE(std::pow(1.0 + 0.7 * m, 1.0 - 3.3) == Catch::Approx(1e-5).epsilon(1e-10));
}

TEST_CASE("single manual event evaluates the kernel exactly") {
  EventSet set;
  set.t0 = 0.0;
  set.t1 = 2.0;
  set.events = {{0.0, 1.0, -1.0}};
  GammaMeanReversion pi{-1.0, 4.0};

  const std::vector<double> x = evaluate_path(set, 0.0, pi, 2, 1.0);
  REQUIRE(x.size() == 2);
  REQUIRE(x[0] == Catch::Approx(std::exp(-1.0)).epsilon(1e-12));
  REQUIRE(x[1] == Catch::Approx(std::exp(-2.0)).epsilon(1e-12));

  REQUIRE(integrated_volatility(set, 0.0, pi, 0.0, 1.0) ==
          Catch::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  REQUIRE(integrated_volatility(set, 0.0, pi, 1.0, 2.0) ==
          Catch::Approx(std::exp(-1.0) - std::exp(-2.0)).epsilon(1e-12));

  const std::vector<double> v = evaluate_integrated_vol(set, 0.0, pi, 2, 1.0);
  REQUIRE(v[0] == Catch::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  REQUIRE(v[1] == Catch::Approx(std::exp(-1.0) - std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("late and early events are handled exactly") {
  // one event before the window, one mid-interval
  EventSet set;
  set.t0 = -3.0;
  set.t1 = 2.0;
  set.events = {{-3.0, 2.0, -0.5}, {0.25, 1.0, -2.0}};
  GammaMeanReversion pi{-1.0, 4.0};

  const std::vector<double> x = evaluate_path(set, 0.0, pi, 2, 1.0);
  REQUIRE(x[0] ==
          Catch::Approx(2.0 * std::exp(-0.5 * 4.0) + std::exp(-2.0 * 0.75)).epsilon(1e-12));
  REQUIRE(x[1] ==
          Catch::Approx(2.0 * std::exp(-0.5 * 5.0) + std::exp(-2.0 * 1.75)).epsilon(1e-12));

  const double direct = integrated_volatility(set, 0.0, pi, 0.0, 1.0);
  const double expect = 2.0 * (std::exp(-0.5 * 4.0) - std::exp(-0.5 * 3.0)) / (-0.5) +
                        1.0 * (std::exp(-2.0 * 0.75) - 1.0) / (-2.0);
  REQUIRE(direct == Catch::Approx(expect).epsilon(1e-12));

  const std::vector<double> v = evaluate_integrated_vol(set, 0.0, pi, 2, 1.0);
  REQUIRE(v[0] == Catch::Approx(expect).epsilon(1e-12));

  // volatility never negative and coverage errors are contract errors
  REQUIRE_THROWS_AS(integrated_volatility(set, 0.0, pi, -4.0, 1.0), Error);
  REQUIRE_THROWS_AS(integrated_volatility(set, 0.0, pi, 1.0, 3.0), Error);
}

TEST_CASE("drift-only path sits at the stationary floor") {
  SubordinatorSpec spec;
  spec.gamma0 = 1.5;
  spec.jump_rate = 1e-12;
  spec.jump_law = JumpLaw::exponential_mean(1.0);
  GammaMeanReversion pi{-1.0, 4.0};
  Rng rng(5);

  const SupOUPath path = simulate_supou_path(spec, pi, 50, 1.0, 1e-6, rng);
  const double floor = 1.5 / 3.0;
  for (double v : path.values) REQUIRE(v == Catch::Approx(floor).epsilon(1e-12));
}

TEST_CASE("path determinism and floor invariant") {
  SubordinatorSpec spec;
  spec.gamma0 = 0.3;
  spec.jump_rate = 1.0;
  spec.jump_law = JumpLaw::exponential_mean(1.0);
  GammaMeanReversion pi{-1.0, 4.0};

  Rng r1(31), r2(31);
  const SupOUPath p1 = simulate_supou_path(spec, pi, 2000, 1.0, 1e-6, r1);
  const SupOUPath p2 = simulate_supou_path(spec, pi, 2000, 1.0, 1e-6, r2);
  REQUIRE(p1.events.events.size() == p2.events.events.size());
  for (std::size_t i = 0; i < p1.values.size(); ++i) REQUIRE(p1.values[i] == p2.values[i]);

  const double floor = 0.3 / 3.0;
  for (double v : p1.values) {
    REQUIRE(v >= floor);
    REQUIRE(std::isfinite(v));
  }
  REQUIRE(p1.horizon == Catch::Approx(99.0));
}

TEST_CASE("stationary sample moments match the closed forms") {
  // theta = (1, 2, 4, -1): E[X] = 1/3, D(k) = (1/3) (1+k)^(-3)
  const SubordinatorSpec spec = exponential_subordinator(1.0, 2.0);
  GammaMeanReversion pi{-1.0, 4.0};
  Rng rng(424242);
  const std::size_t n = 100000;
  const SupOUPath path = simulate_supou_path(spec, pi, n, 1.0, 1e-6, rng);

  const double mean = std::accumulate(path.values.begin(), path.values.end(), 0.0) / double(n);
  REQUIRE(std::abs(mean - 1.0 / 3.0) < 0.02);

  for (std::size_t k = 0; k <= 5; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + k < n; ++t)
      acc += (path.values[t] - mean) * (path.values[t + k] - mean);
    const double dk = acc / double(n);
    const double expect = (1.0 / 3.0) * std::pow(1.0 + double(k), -3.0);
    REQUIRE(std::abs(dk - expect) < 0.025);
  }
}

TEST_CASE("returns are centered with the right second and fourth moments") {
  const SubordinatorSpec spec = exponential_subordinator(1.0, 2.0);
  GammaMeanReversion pi{-1.0, 4.0};
  Rng rng(777);
  const std::size_t n = 100000;
  const ReturnSeries series = simulate_returns(spec, pi, n, 1.0, 1e-6, rng);
  REQUIRE(series.y.size() == n);
  REQUIRE(series.v.size() == n);

  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (double y : series.y) {
    s1 += y;
    s2 += y * y;
    s4 += y * y * y * y;
  }
  const double var_y = s2 / double(n);
  // E[Y] = 0 within 4 sd of the sample mean; Var(Y) = 1/3
  REQUIRE(std::abs(s1 / double(n)) <= 4.0 * std::sqrt(var_y / double(n)));
  REQUIRE(var_y == Catch::Approx(1.0 / 3.0).margin(0.02));
  // E[Y^4] = Var(Y^2) + E[Y^2]^2 = 0.722222 + 0.111111
  REQUIRE(s4 / double(n) == Catch::Approx(0.833333).margin(0.08));

  for (double v : series.v) REQUIRE(v > 0.0);
}

TEST_CASE("standardized returns pass a normality moment check") {
  const SubordinatorSpec spec = exponential_subordinator(1.0, 2.0);
  GammaMeanReversion pi{-1.0, 4.0};
  Rng rng(888);
  const std::size_t n = 20000;
  const ReturnSeries series = simulate_returns(spec, pi, n, 1.0, 1e-6, rng);

  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double z = series.y[t] / std::sqrt(series.v[t]);
    s1 += z;
    s2 += z * z;
    s3 += z * z * z;
    s4 += z * z * z * z;
  }
  const double mean = s1 / double(n);
  const double var = s2 / double(n) - mean * mean;
  const double skew = (s3 / double(n) - 3.0 * mean * var - mean * mean * mean) / std::pow(var, 1.5);
  const double kurt = s4 / double(n) / (var * var) - 3.0;
  REQUIRE(std::abs(skew) < 4.0 * std::sqrt(6.0 / double(n)));
  REQUIRE(std::abs(kurt) < 4.0 * std::sqrt(24.0 / double(n)));
}

TEST_CASE("returns determinism") {
  const SubordinatorSpec spec = exponential_subordinator(2.0, 1.0);
  GammaMeanReversion pi{-0.5, 3.5};
  Rng r1(64), r2(64);
  const ReturnSeries a = simulate_returns(spec, pi, 500, 0.5, 1e-5, r1);
  const ReturnSeries b = simulate_returns(spec, pi, 500, 0.5, 1e-5, r2);
  for (std::size_t i = 0; i < a.y.size(); ++i) {
    REQUIRE(a.y[i] == b.y[i]);
    REQUIRE(a.v[i] == b.v[i]);
  }
}
