#include <algorithm>
#include <array>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdint>
#include <vector>

#include "supou/analytics.hpp"
#include "supou/errors.hpp"
#include "supou/levy.hpp"
#include "supou/quad.hpp"
#include "supou/rng.hpp"
#include "supou/simulate.hpp"

using namespace supou;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::MessageMatches;

namespace {

ThetaParams make_theta(double mu, double sigma2, double alpha_pi, double B) {
  ThetaParams t;
  t.mu = mu;
  t.sigma2 = sigma2;
  t.alpha_pi = alpha_pi;
  t.B = B;
  return t;
}

LevyCumulants make_levy(double m3, double m4) {
  LevyCumulants c;
  c.m3 = m3;
  c.m4 = m4;
  return c;
}

double mean_c(const ThetaParams& t) { return -t.mu / (t.B * (t.alpha_pi - 1.0)); }

// Moment expansions rebuilt from the public cumulant API, so the quadrature
// and sampling oracles below share no code with the implementation under
// test.
double e3_pub(const ThetaParams& t, const LevyCumulants& lv, double x, double y, double z) {
  const double c = mean_c(t);
  return cum3(t, lv.m3, 1.0, {x, y, z}) +
         c * (supou_autocov(t, std::abs(x - y)) + supou_autocov(t, std::abs(x - z)) +
              supou_autocov(t, std::abs(y - z))) +
         c * c * c;
}

double e4_pub(const ThetaParams& t, const LevyCumulants& lv, double w, double x, double y,
              double z) {
  const double c = mean_c(t);
  const double dwx = supou_autocov(t, std::abs(w - x));
  const double dwy = supou_autocov(t, std::abs(w - y));
  const double dwz = supou_autocov(t, std::abs(w - z));
  const double dxy = supou_autocov(t, std::abs(x - y));
  const double dxz = supou_autocov(t, std::abs(x - z));
  const double dyz = supou_autocov(t, std::abs(y - z));
  return cum4(t, lv.m4, 1.0, {w, x, y, z}) +
         c * (cum3(t, lv.m3, 1.0, {x, y, z}) + cum3(t, lv.m3, 1.0, {w, y, z}) +
              cum3(t, lv.m3, 1.0, {w, x, z}) + cum3(t, lv.m3, 1.0, {w, x, y})) +
         (dwx * dyz + dwy * dxz + dwz * dxy) +
         c * c * (dwx + dwy + dwz + dxy + dxz + dyz) + c * c * c * c;
}

// Adaptive nested quadrature over the raw printed region: t over box i,
// s over box j, u over [j Delta, s], times the table factor.
double oracle_t3(const ThetaParams& t, const LevyCumulants& lv, double delta, long i, long j,
                 double factor) {
  // The covariance kink sits where two times coincide; for the coincident-box
  // row that happens inside the region, so the inner integrals are split at
  // the crossing to keep each adaptive panel smooth.
  auto outer = [&](double tt) {
    auto in_u = [&](double s) {
      auto f = [&](double u) { return e3_pub(t, lv, tt, s, u); };
      const double lo = double(j) * delta;
      if (tt > lo && tt < s)
        return quad::integrate(f, lo, tt, 1e-13, 1e-10) +
               quad::integrate(f, tt, s, 1e-13, 1e-10);
      return quad::integrate(f, lo, s, 1e-13, 1e-10);
    };
    const double lo = double(j) * delta, hi = double(j + 1) * delta;
    if (tt > lo && tt < hi)
      return quad::integrate(in_u, lo, tt, 1e-12, 1e-9) +
             quad::integrate(in_u, tt, hi, 1e-12, 1e-9);
    return quad::integrate(in_u, lo, hi, 1e-12, 1e-9);
  };
  return factor *
         quad::integrate(outer, double(i) * delta, double(i + 1) * delta, 1e-11, 1e-8);
}

struct McStat {
  double value = 0.0;
  double se = 0.0;
};

// Uniform volume sampling of a raw ordered region; f draws one point and
// returns the integrand value there.
template <typename Draw>
McStat mc_region(std::uint64_t seed, std::size_t n, double volume, Draw&& draw) {
  Rng rng(seed);
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const double v = draw(rng);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / double(n);
  const double var = std::max(0.0, sumsq / double(n) - mean * mean) / double(n - 1);
  return {volume * mean, volume * std::sqrt(var)};
}

double draw_box(Rng& rng, double lo, double delta) { return lo + delta * rng.uniform(); }

// Uniform point on {lo <= u <= s <= lo + delta}; returns (s, u).
std::array<double, 2> draw_triangle(Rng& rng, double lo, double delta) {
  const double a = lo + delta * rng.uniform();
  const double b = lo + delta * rng.uniform();
  return {std::max(a, b), std::min(a, b)};
}

}  // namespace

TEST_CASE("distinct-box index patterns vanish") {
  const auto t = make_theta(1.0, 2.0, 4.0, -1.0);
  const auto lv = make_levy(6.0, 24.0);
  CHECK(a_term(t, lv, 1.0, {0, 1, 2}) == 0.0);
  CHECK(a_term(t, lv, 1.0, {5, 2, 9}) == 0.0);
  CHECK(a_term(t, lv, 1.0, {-3, 4, 0}) == 0.0);
  CHECK(a_term(t, lv, 1.0, {0, 1, 2, 3}) == 0.0);
  CHECK(a_term(t, lv, 1.0, {3, 0, 7, 12}) == 0.0);
  CHECK(a_term(t, lv, 0.5, {-1, 6, 2, 4}) == 0.0);
}

TEST_CASE("third-order rows match adaptive quadrature of the raw region") {
  const auto t1 = make_theta(1.0, 2.0, 4.0, -1.0);
  const auto lv1 = make_levy(6.0, 24.0);
  const auto t2 = make_theta(0.7, 1.3, 3.4, -0.6);
  const auto lv2 = make_levy(2.5, 11.0);

  SECTION("pair above the single box") {
    const double got = a_term(t1, lv1, 1.0, {0, 1, 1});
    const double want = oracle_t3(t1, lv1, 1.0, 0, 1, 4.0);
    CHECK(got == Catch::Approx(want).epsilon(1e-7));
  }
  SECTION("pair below the single box") {
    const double got = a_term(t1, lv1, 1.0, {3, 0, 0});
    const double want = oracle_t3(t1, lv1, 1.0, 3, 0, 4.0);
    CHECK(got == Catch::Approx(want).epsilon(1e-7));
  }
  SECTION("separated pair, non-integer tail index and coarser step") {
    const double got = a_term(t2, lv2, 0.5, {0, 3, 3});
    const double want = oracle_t3(t2, lv2, 0.5, 0, 3, 4.0);
    CHECK(got == Catch::Approx(want).epsilon(1e-7));
  }
  SECTION("fully coincident triple") {
    const double got = a_term(t1, lv1, 1.0, {2, 2, 2});
    const double want = oracle_t3(t1, lv1, 1.0, 2, 2, 12.0);
    CHECK(got == Catch::Approx(want).epsilon(1e-6));
    const double got2 = a_term(t2, lv2, 0.5, {0, 0, 0});
    const double want2 = oracle_t3(t2, lv2, 0.5, 0, 0, 12.0);
    CHECK(got2 == Catch::Approx(want2).epsilon(1e-6));
  }
}

TEST_CASE("index shifts leave the value unchanged") {
  const auto t = make_theta(1.0, 2.0, 4.2, -0.8);
  const auto lv = make_levy(3.0, 10.0);
  CHECK(a_term(t, lv, 1.0, {5, 6, 6}) == Catch::Approx(a_term(t, lv, 1.0, {0, 1, 1})));
  CHECK(a_term(t, lv, 1.0, {-2, -2, -2}) == Catch::Approx(a_term(t, lv, 1.0, {0, 0, 0})));
  CHECK(a_term(t, lv, 1.0, {2, 3, 3, 3}) ==
        Catch::Approx(a_term(t, lv, 1.0, {0, 1, 1, 1})));
  CHECK(a_term(t, lv, 1.0, {-1, -1, 1, 1}) ==
        Catch::Approx(a_term(t, lv, 1.0, {0, 0, 2, 2})));
}

TEST_CASE("fourth-order rows match volume sampling of the raw regions") {
  const auto t = make_theta(1.0, 2.0, 4.0, -1.0);
  const auto lv = make_levy(6.0, 24.0);
  const double delta = 1.0;

  SECTION("triple in one box, singleton in another") {
    const double got = a_term(t, lv, delta, {0, 1, 1, 1});
    auto mc = mc_region(20240811u, 800000, delta * delta * delta * delta / 2.0,
                        [&](Rng& rng) {
                          const double tt = draw_box(rng, 0.0, delta);
                          const double zz = draw_box(rng, delta, delta);
                          const auto su = draw_triangle(rng, delta, delta);
                          return e4_pub(t, lv, tt, zz, su[0], su[1]);
                        });
    mc.value *= 12.0;
    mc.se *= 12.0;
    CHECK(std::abs(got - mc.value) <= 6.0 * mc.se);
  }

  SECTION("three distinct boxes with the top pair tied") {
    const double got = a_term(t, lv, delta, {0, 2, 4, 4});
    auto mc = mc_region(20240812u, 800000, delta * delta * delta * delta / 2.0,
                        [&](Rng& rng) {
                          const double tt = draw_box(rng, 0.0, delta);
                          const double zz = draw_box(rng, 2.0 * delta, delta);
                          const auto su = draw_triangle(rng, 4.0 * delta, delta);
                          return e4_pub(t, lv, tt, zz, su[0], su[1]);
                        });
    mc.value *= 4.0;
    mc.se *= 4.0;
    CHECK(std::abs(got - mc.value) <= 6.0 * mc.se);
  }

  SECTION("two tied pairs, all three printed terms") {
    const double got = a_term(t, lv, delta, {0, 0, 1, 1});
    auto mc1 = mc_region(20240813u, 800000, delta * delta * delta * delta / 2.0,
                         [&](Rng& rng) {
                           const double tt = draw_box(rng, 0.0, delta);
                           const double zz = draw_box(rng, 0.0, delta);
                           const auto su = draw_triangle(rng, delta, delta);
                           return e4_pub(t, lv, tt, zz, su[0], su[1]);
                         });
    auto mc2 = mc_region(20240814u, 800000, delta * delta * delta * delta / 2.0,
                         [&](Rng& rng) {
                           const auto tz = draw_triangle(rng, 0.0, delta);
                           const double ss = draw_box(rng, delta, delta);
                           const double uu = draw_box(rng, delta, delta);
                           return e4_pub(t, lv, tz[0], tz[1], ss, uu);
                         });
    auto mc3 = mc_region(20240815u, 800000, delta * delta * delta * delta / 4.0,
                         [&](Rng& rng) {
                           const auto tz = draw_triangle(rng, 0.0, delta);
                           const auto su = draw_triangle(rng, delta, delta);
                           return e4_pub(t, lv, tz[0], tz[1], su[0], su[1]);
                         });
    const double value = 4.0 * mc1.value + 4.0 * mc2.value + 16.0 * mc3.value;
    const double se = std::sqrt(16.0 * mc1.se * mc1.se + 16.0 * mc2.se * mc2.se +
                                256.0 * mc3.se * mc3.se);
    CHECK(std::abs(got - value) <= 6.0 * se);
  }

  SECTION("single box, squared-integral and ordered tail terms") {
    const double got = a_term(t, lv, delta, {0, 0, 0, 0});
    auto mc1 = mc_region(20240816u, 800000, delta * delta * delta * delta / 2.0,
                         [&](Rng& rng) {
                           const double t1 = draw_box(rng, 0.0, delta);
                           const double t2 = draw_box(rng, 0.0, delta);
                           const auto su = draw_triangle(rng, 0.0, delta);
                           return e4_pub(t, lv, t1, t2, su[0], su[1]);
                         });
    const double c = mean_c(t);
    auto mc2 = mc_region(20240817u, 400000, delta * delta * delta / 6.0, [&](Rng& rng) {
      std::array<double, 3> v = {delta * rng.uniform(), delta * rng.uniform(),
                                 delta * rng.uniform()};
      std::sort(v.begin(), v.end());
      return supou_autocov(t, v[1] - v[0]) + c * c;
    });
    const double value = 24.0 * mc1.value + 96.0 * mc2.value;
    const double se =
        std::sqrt(576.0 * mc1.se * mc1.se + 9216.0 * mc2.se * mc2.se);
    CHECK(std::abs(got - value) <= 6.0 * se);
  }
}

TEST_CASE("mean-zero skewless rows reduce to covariance products") {
  // With mu = 0 and vanishing third and fourth cumulants only the pairwise
  // covariance pairings survive, and every region integral collapses onto
  // products of integrated covariances.
  const auto t = make_theta(0.0, 2.0, 4.0, -1.0);
  const auto lv = make_levy(0.0, 0.0);
  const double delta = 1.0;
  const double var_v = integrated_variance(t, delta);
  const double p1 = returns_cov(t, delta, 1);
  const double p2 = returns_cov(t, delta, 2);

  SECTION("third-order rows vanish entirely") {
    CHECK(a_term(t, lv, delta, {0, 1, 1}) == Catch::Approx(0.0).margin(1e-14));
    CHECK(a_term(t, lv, delta, {0, 0, 0}) == Catch::Approx(0.0).margin(1e-14));
  }
  SECTION("triple plus singleton") {
    CHECK(a_term(t, lv, delta, {0, 1, 1, 1}) ==
          Catch::Approx(18.0 * p1 * var_v).epsilon(1e-9));
  }
  SECTION("distinct boxes with top pair tied") {
    CHECK(a_term(t, lv, delta, {0, 1, 2, 2}) ==
          Catch::Approx(2.0 * (p1 * var_v + 2.0 * p2 * p1)).epsilon(1e-9));
  }
  SECTION("two tied pairs") {
    CHECK(a_term(t, lv, delta, {0, 0, 1, 1}) ==
          Catch::Approx(8.0 * (var_v * var_v + 2.0 * p1 * p1)).epsilon(1e-9));
  }
  SECTION("fully coincident quadruple") {
    const double tail = quad::integrate(
        [&](double w) { return w <= 0.0 ? 0.0 : integrated_variance(t, w); }, 0.0, delta,
        1e-12, 1e-10);
    CHECK(a_term(t, lv, delta, {0, 0, 0, 0}) ==
          Catch::Approx(36.0 * var_v * var_v + 48.0 * tail).epsilon(1e-8));
  }
  SECTION("coarser step") {
    const double vv = integrated_variance(t, 0.5);
    const double q1 = returns_cov(t, 0.5, 1);
    CHECK(a_term(t, lv, 0.5, {0, 0, 1, 1}) ==
          Catch::Approx(8.0 * (vv * vv + 2.0 * q1 * q1)).epsilon(1e-9));
  }
}

TEST_CASE("pair-with-singleton row matches a path-simulation oracle") {
  // Exact finite-variation paths: evaluate the raw triple-product integral by
  // uniform sampling over the ordered region, one average per replication.
  const auto theta = make_theta(1.0, 2.0, 4.0, -1.0);
  const auto spec = exponential_subordinator(1.0, 2.0);
  GammaMeanReversion pi;
  pi.B = -1.0;
  pi.alpha_pi = 4.0;
  const auto lv = levy_cumulants(spec);
  const double delta = 1.0;

  const double value = a_term(theta, lv, delta, {0, 1, 1});

  const double horizon = truncation_horizon(pi, 1e-6);
  const std::size_t reps = 4000;
  const std::size_t points = 64;
  std::vector<double> zs;
  zs.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    Rng rng = Rng::stream(778899u, r);
    const EventSet ev = sample_levy_events(spec, pi, -horizon, 2.0 * delta, rng);
    auto x_at = [&](double tau) {
      double acc = 0.0;
      for (const Event& e : ev.events) {
        if (e.s > tau) break;
        acc += e.x * std::exp(e.a * (tau - e.s));
      }
      return acc;
    };
    double avg = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
      const double tt = delta * rng.uniform();
      const auto su = draw_triangle(rng, delta, delta);
      avg += x_at(tt) * x_at(su[0]) * x_at(su[1]);
    }
    avg /= double(points);
    // region volume Delta^3/2 and the table factor 4
    zs.push_back(4.0 * (delta * delta * delta / 2.0) * avg);
  }
  double mean = 0.0;
  for (double z : zs) mean += z;
  mean /= double(reps);
  double var = 0.0;
  for (double z : zs) var += (z - mean) * (z - mean);
  var /= double(reps - 1);
  const double se = std::sqrt(var / double(reps));

  INFO("oracle " << mean << " +- " << se << " vs " << value);
  CHECK(std::abs(value - mean) <= 4.0 * se);
}

TEST_CASE("unmatched coincidence patterns are contract errors") {
  const auto t = make_theta(1.0, 2.0, 4.0, -1.0);
  const auto lv = make_levy(6.0, 24.0);
  const auto is_contract = [](const Error& e) { return e.kind() == errc::contract; };

  for (const std::vector<long>& bad :
       {std::vector<long>{0, 0, 1}, {0, 1, 0}, {0, 0, 0, 1}, {0, 1, 1, 2}, {0, 1, 0, 1},
        {0, 1, 1, 0}, {0, 0, 0, 2}}) {
    CHECK_THROWS_MATCHES(a_term(t, lv, 1.0, bad), Error,
                         MessageMatches(ContainsSubstring("coincidence")));
    try {
      a_term(t, lv, 1.0, bad);
    } catch (const Error& e) {
      CHECK(is_contract(e));
    }
  }

  CHECK_THROWS_MATCHES(a_term(t, lv, 1.0, {0, 1}), Error,
                       MessageMatches(ContainsSubstring("3 or 4")));
  CHECK_THROWS_MATCHES(a_term(t, lv, 1.0, {0, 1, 2, 3, 4}), Error,
                       MessageMatches(ContainsSubstring("3 or 4")));
  CHECK_THROWS_MATCHES(a_term(t, lv, 0.0, {0, 1, 1}), Error,
                       MessageMatches(ContainsSubstring("delta")));
  CHECK_THROWS_MATCHES(a_term(t, lv, 1.0, {0, 1, 1}, 0.0), Error,
                       MessageMatches(ContainsSubstring("quad_tol")));
}
