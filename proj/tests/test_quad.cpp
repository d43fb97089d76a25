#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "supou/errors.hpp"
#include "supou/quad.hpp"

namespace quad = supou::quad;

TEST_CASE("finite interval integration") {
  const double v = quad::integrate([](double x) { return x * x; }, 0.0, 1.0, 1e-12);
  REQUIRE(v == Catch::Approx(1.0 / 3.0).epsilon(1e-12));

  const double w = quad::integrate([](double x) { return std::exp(-x * x); }, -3.0, 3.0, 1e-12);
  REQUIRE(w == Catch::Approx(std::sqrt(std::acos(-1.0)) * std::erf(3.0)).epsilon(1e-11));
}

TEST_CASE("semi-infinite integration") {
  const double up = quad::integrate_upper([](double x) { return std::exp(-x); }, 0.0, 1e-12);
  REQUIRE(up == Catch::Approx(1.0).epsilon(1e-11));

  const double lo = quad::integrate_lower([](double x) { return std::exp(x); }, 0.0, 1e-12);
  REQUIRE(lo == Catch::Approx(1.0).epsilon(1e-11));

  const double heavy =
      quad::integrate_upper([](double x) { return std::pow(1.0 + x, -3.0); }, 0.0, 1e-12);
  REQUIRE(heavy == Catch::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("integrands may integrate (nested workspaces)") {
  const double v = quad::integrate(
      [](double x) {
        return quad::integrate([x](double y) { return x + y; }, 0.0, 1.0, 1e-12);
      },
      0.0, 1.0, 1e-12);
  REQUIRE(v == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("unreachable tolerance raises a numeric error with diagnostics") {
  try {
    quad::integrate([](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3)); }, 0.0, 1.0, 1e-300);
    FAIL("expected throw");
  } catch (const supou::Error& e) {
    REQUIRE(e.kind() == supou::errc::numeric);
    REQUIRE(std::string(e.what()).find("achieved estimate") != std::string::npos);
  }
}

TEST_CASE("fixed Gauss-Legendre rule is exact on low-degree polynomials") {
  for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 16u, 33u}) {
    std::vector<double> x(n), w(n);
    quad::gauss_legendre(n, -1.0, 2.0, x.data(), w.data());
    // degree 2n-1 polynomial: p(t) = t^(2n-1) + t
    double approx = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      approx += w[i] * (std::pow(x[i], double(2 * n - 1)) + x[i]);
    const double p = double(2 * n);
    const double exact = (std::pow(2.0, p) - std::pow(-1.0, p)) / p + (4.0 - 1.0) / 2.0;
    REQUIRE(approx == Catch::Approx(exact).epsilon(1e-10).margin(1e-10));
  }
}
