#include <algorithm>
#include <cmath>
#include <sstream>

#include "analytics_detail.hpp"
#include "supou/errors.hpp"
#include "supou/quad.hpp"

namespace supou::detail {

namespace {

constexpr std::size_t kSegOrder = 32;

// int_0^2 u(c-1+z)^(2-alpha) * min(z, 2-z) dz with u(k) = 1 - B Delta k:
// the two-fold box average of the second derivative kernel.
double q_tent(const ThetaParams& theta, double delta, double c) {
  const double e = 2.0 - theta.alpha_pi;
  double x[kSegOrder], w[kSegOrder];
  double acc = 0.0;
  quad::gauss_legendre(kSegOrder, 0.0, 1.0, x, w);
  for (std::size_t i = 0; i < kSegOrder; ++i)
    acc += w[i] * x[i] * std::pow(1.0 - theta.B * delta * (c - 1.0 + x[i]), e);
  quad::gauss_legendre(kSegOrder, 1.0, 2.0, x, w);
  for (std::size_t i = 0; i < kSegOrder; ++i)
    acc += w[i] * (2.0 - x[i]) * std::pow(1.0 - theta.B * delta * (c - 1.0 + x[i]), e);
  return acc;
}

// Quadratic B-spline weight: the density of the sum of three uniforms.
double spline3(double z) {
  if (z < 1.0) return 0.5 * z * z;
  if (z < 2.0) return 0.5 * (-2.0 * z * z + 6.0 * z - 3.0);
  return 0.5 * (3.0 - z) * (3.0 - z);
}

// int_0^3 u(c+z)^(2-alpha) * spline3(z) dz: three-fold box average.
double j_spline(const ThetaParams& theta, double delta, double c) {
  const double e = 2.0 - theta.alpha_pi;
  double x[kSegOrder], w[kSegOrder];
  double acc = 0.0;
  for (int seg = 0; seg < 3; ++seg) {
    quad::gauss_legendre(kSegOrder, double(seg), double(seg + 1), x, w);
    for (std::size_t i = 0; i < kSegOrder; ++i)
      acc += w[i] * spline3(x[i]) * std::pow(1.0 - theta.B * delta * (c + x[i]), e);
  }
  return acc;
}

}  // namespace

double k3_strict(const ThetaParams& theta, double m3, double delta, long w) {
  const double a = theta.alpha_pi;
  const double diff = q_tent(theta, delta, double(w + 1)) - q_tent(theta, delta, double(w - 1));
  return -m3 * delta * delta * diff / (6.0 * theta.B * theta.B * (a - 1.0) * (a - 2.0));
}

double k4_strict(const ThetaParams& theta, double m4, double delta, long w) {
  const double a = theta.alpha_pi;
  const double diff = j_spline(theta, delta, double(w)) - j_spline(theta, delta, double(w - 3));
  return -m4 * delta * delta * delta * diff /
         (12.0 * theta.B * theta.B * (a - 1.0) * (a - 2.0));
}

namespace {

// phi(G): the un-integrated joint cumulant at real gap sum G.
double phi_cum(const ThetaParams& theta, double mcoef, std::size_t order, double g) {
  const double a = theta.alpha_pi;
  return -mcoef * std::pow(1.0 - theta.B * g, 1.0 - a) /
         (double(order) * theta.B * (a - 1.0));
}

// K3 over boxes (0, 0, c) with c >= 1: the coincident pair holds the minimum.
// Order statistics on the pair turn its double integral into a tent weight in
// s = t2 - 2v; the third box is integrated directly. Pole-free in alpha_pi.
double k3_pair_min(const ThetaParams& theta, double m3, double delta, long c) {
  double xs[kSegOrder], ws[kSegOrder], xt[kSegOrder], wt[kSegOrder];
  quad::gauss_legendre(kSegOrder, double(c) * delta, double(c + 1) * delta, xt, wt);
  double acc = 0.0;
  for (int seg = 0; seg < 2; ++seg) {
    quad::gauss_legendre(kSegOrder, (seg - 1) * delta, seg * delta, xs, ws);
    for (std::size_t i = 0; i < kSegOrder; ++i) {
      const double wtri = 0.5 * (delta - std::abs(xs[i]));
      double inner = 0.0;
      for (std::size_t j = 0; j < kSegOrder; ++j)
        inner += wt[j] * phi_cum(theta, m3, 3, xs[i] + xt[j]);
      acc += ws[i] * wtri * inner;
    }
  }
  return 2.0 * acc;
}

// K4 over boxes (0, 0, c, d) with 1 <= c <= d: pair at the minimum, the two
// upper boxes reduced to the tent convolution, the pair to a piecewise-linear
// weight in s = t2 - 3v. Pole-free in alpha_pi.
double k4_pair_min(const ThetaParams& theta, double m4, double delta, long c, long d) {
  const double w2 = double(c + d);
  double xz[kSegOrder], wz[kSegOrder], xs[kSegOrder], ws[kSegOrder];
  double acc = 0.0;
  for (int zseg = 0; zseg < 2; ++zseg) {
    quad::gauss_legendre(kSegOrder, double(zseg), double(zseg + 1), xz, wz);
    for (std::size_t i = 0; i < kSegOrder; ++i) {
      const double tent = zseg == 0 ? xz[i] : 2.0 - xz[i];
      const double upper = delta * (w2 + xz[i]);
      double inner = 0.0;
      for (int sseg = 0; sseg < 3; ++sseg) {
        quad::gauss_legendre(kSegOrder, (sseg - 2) * delta, (sseg - 1) * delta, xs, ws);
        for (std::size_t j = 0; j < kSegOrder; ++j) {
          const double wlin = xs[j] <= 0.0 ? (2.0 * delta + xs[j]) / 6.0
                                           : (delta - xs[j]) / 3.0;
          inner += ws[j] * wlin * phi_cum(theta, m4, 4, upper + xs[j]);
        }
      }
      acc += wz[i] * tent * inner;
    }
  }
  return 2.0 * delta * delta * acc;
}

// One nested Gauss-Legendre pass at the given order. Offsets are canonical
// (sorted, offsets[0] == 0) with the lowest group of size g sharing box 0.
// Order-statistics reduction: the minimum coordinate v lives in box 0; the
// g-1 same-box mates integrate over [v, Delta]; higher boxes are full.
double box_pass(const ThetaParams& theta, double mcoef, double delta,
                const std::vector<long>& offsets, std::size_t n) {
  const std::size_t k = offsets.size();
  std::size_t g = 1;
  while (g < k && offsets[g] == 0) ++g;

  std::vector<double> xv(n), wv(n), xs(n), ws(n);
  quad::gauss_legendre(n, 0.0, delta, xv.data(), wv.data());

  double total = 0.0;
  for (std::size_t iv = 0; iv < n; ++iv) {
    const double v = xv[iv];
    // recursively integrate mates then the higher boxes
    struct Frame {
      double sum;
      double weight;
    };
    std::vector<Frame> stack{{0.0, wv[iv]}};
    // mates: g-1 integrals over [v, delta]
    for (std::size_t mate = 0; mate + 1 < g; ++mate) {
      quad::gauss_legendre(n, v, delta, xs.data(), ws.data());
      std::vector<Frame> nextstack;
      nextstack.reserve(stack.size() * n);
      for (const Frame& f : stack)
        for (std::size_t i = 0; i < n; ++i)
          nextstack.push_back({f.sum + xs[i], f.weight * ws[i]});
      stack.swap(nextstack);
    }
    // higher boxes: full [offset*delta, (offset+1)*delta]
    for (std::size_t o = g; o < k; ++o) {
      quad::gauss_legendre(n, double(offsets[o]) * delta, double(offsets[o] + 1) * delta,
                           xs.data(), ws.data());
      std::vector<Frame> nextstack;
      nextstack.reserve(stack.size() * n);
      for (const Frame& f : stack)
        for (std::size_t i = 0; i < n; ++i)
          nextstack.push_back({f.sum + xs[i], f.weight * ws[i]});
      stack.swap(nextstack);
    }
    for (const Frame& f : stack)
      total += f.weight * phi_cum(theta, mcoef, k, f.sum - double(k - 1) * v);
  }
  return double(g) * total;
}

}  // namespace

double k_box_quad(const ThetaParams& theta, double mcoef, double delta,
                  const std::vector<long>& offsets, double quad_tol) {
  double prev = 0.0;
  bool have_prev = false;
  for (std::size_t n : {12, 18, 27, 40, 60}) {
    const double cur = box_pass(theta, mcoef, delta, offsets, n);
    if (have_prev) {
      const double diff = std::abs(cur - prev);
      if (diff <= std::max(quad_tol, 1e-11 * std::abs(cur))) return cur;
    }
    prev = cur;
    have_prev = true;
  }
  std::ostringstream os;
  os << "box cumulant quadrature did not converge to tolerance " << quad_tol
     << "; achieved estimate " << prev << " at the highest order";
  fail(errc::numeric, os.str());
}

double integrated_cum_impl(const ThetaParams& theta, double mcoef, double delta,
                           std::vector<long> indices, double quad_tol) {
  if (mcoef == 0.0) return 0.0;
  std::sort(indices.begin(), indices.end());
  const long base = indices[0];
  for (long& v : indices) v -= base;

  const bool strict = indices[1] >= 1;
  if (strict) {
    long w = 0;
    for (long v : indices) w += v;
    if (indices.size() == 3) return k3_strict(theta, mcoef, delta, w);
    return k4_strict(theta, mcoef, delta, w);
  }
  if (indices[2] >= 1) {
    // exactly two coincident indices at the minimum
    if (indices.size() == 3) return k3_pair_min(theta, mcoef, delta, indices[2]);
    return k4_pair_min(theta, mcoef, delta, indices[2], indices[3]);
  }
  return k_box_quad(theta, mcoef, delta, indices, quad_tol);
}

}  // namespace supou::detail

namespace supou {

double integrated_cum(const ThetaParams& theta, const LevyCumulants& levy, double delta,
                      const std::vector<long>& indices, double quad_tol) {
  theta.validate();
  require(delta > 0.0, errc::contract, "delta must be positive");
  require(indices.size() == 3 || indices.size() == 4, errc::contract,
          "integrated_cum takes 3 or 4 box indices");
  require(quad_tol > 0.0, errc::contract, "quad_tol must be positive");
  const double mcoef = indices.size() == 3 ? levy.m3 : levy.m4;
  return detail::integrated_cum_impl(theta, mcoef, delta, indices, quad_tol);
}

}  // namespace supou
