#include "supou/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "supou/errors.hpp"
#include "supou/quad.hpp"

namespace supou {

namespace {

// Raw moments of the stationary process evaluated at real-time points, built
// from the cumulant expansions: E[XYZ] = k3 + mean * (pair covariances) +
// mean^3, and the analogous four-point expansion with k4, k1*k3, k2*k2,
// k1^2*k2, and k1^4 groups.
struct MomentCtx {
  double B = 0.0;
  double a = 0.0;  // alpha_pi
  double C = 0.0;  // process mean
  double s2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;

  MomentCtx(const ThetaParams& theta, const LevyCumulants& levy)
      : B(theta.B),
        a(theta.alpha_pi),
        C(-theta.mu / (theta.B * (theta.alpha_pi - 1.0))),
        s2(theta.sigma2),
        m3(levy.m3),
        m4(levy.m4) {}

  double pw(double g) const { return std::pow(1.0 - B * g, 1.0 - a); }

  double cov(double h) const { return -s2 * pw(std::abs(h)) / (2.0 * B * (a - 1.0)); }

  double k3(double x, double y, double z) const {
    const double g = x + y + z - 3.0 * std::min({x, y, z});
    return -m3 * pw(g) / (3.0 * B * (a - 1.0));
  }

  double k4(double x, double y, double z, double w) const {
    const double g = x + y + z + w - 4.0 * std::min({x, y, z, w});
    return -m4 * pw(g) / (4.0 * B * (a - 1.0));
  }

  double e3(double t, double s, double u) const {
    return k3(t, s, u) + C * (cov(t - s) + cov(t - u) + cov(s - u)) + C * C * C;
  }

  double e4(double t, double z, double s, double u) const {
    const double dtz = cov(t - z), dts = cov(t - s), dtu = cov(t - u);
    const double dzs = cov(z - s), dzu = cov(z - u), dsu = cov(s - u);
    return k4(t, z, s, u) +
           C * (k3(z, s, u) + k3(t, s, u) + k3(t, z, u) + k3(t, z, s)) +
           (dtz * dsu + dts * dzu + dtu * dzs) +
           C * C * (dtz + dts + dtu + dzs + dzu + dsu) + C * C * C * C;
  }

  double e2(double u, double z) const { return cov(u - z) + C * C; }
};

// The ordered-region integrands are smooth as long as no two integration
// variables sweep the same box unordered: the covariance kink sits at equal
// times. Passes below therefore keep coinciding boxes in order-statistics
// form (exact symmetry reductions of the raw regions) so that every pairwise
// gap has a fixed sign and fixed-order Gauss-Legendre nodes converge.

// t over box i, s over box j, u over [j*delta, s]; needs i != j.
double t3_box_ordered(const MomentCtx& c, double delta, long i, long j, std::size_t n) {
  std::vector<double> xt(n), wt(n), xs(n), ws(n), xu(n), wu(n);
  quad::gauss_legendre(n, double(i) * delta, double(i + 1) * delta, xt.data(), wt.data());
  quad::gauss_legendre(n, double(j) * delta, double(j + 1) * delta, xs.data(), ws.data());
  double total = 0.0;
  for (std::size_t is = 0; is < n; ++is) {
    quad::gauss_legendre(n, double(j) * delta, xs[is], xu.data(), wu.data());
    double plane = 0.0;
    for (std::size_t it = 0; it < n; ++it)
      for (std::size_t iu = 0; iu < n; ++iu)
        plane += wt[it] * wu[iu] * c.e3(xt[it], xs[is], xu[iu]);
    total += ws[is] * plane;
  }
  return total;
}

// v1 <= v2 <= v3 within box i.
double t3_simplex(const MomentCtx& c, double delta, long i, std::size_t n) {
  std::vector<double> x1(n), w1(n), x2(n), w2(n), x3(n), w3(n);
  const double hi = double(i + 1) * delta;
  quad::gauss_legendre(n, double(i) * delta, hi, x1.data(), w1.data());
  double total = 0.0;
  for (std::size_t i1 = 0; i1 < n; ++i1) {
    quad::gauss_legendre(n, x1[i1], hi, x2.data(), w2.data());
    double mid = 0.0;
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      quad::gauss_legendre(n, x2[i2], hi, x3.data(), w3.data());
      double inner = 0.0;
      for (std::size_t i3 = 0; i3 < n; ++i3)
        inner += w3[i3] * c.e3(x1[i1], x2[i2], x3[i3]);
      mid += w2[i2] * inner;
    }
    total += w1[i1] * mid;
  }
  return total;
}

// t over box i, z over box j, s over box k, u over [k*delta, s]; i, j, k
// pairwise distinct.
double t4_box_box_ordered(const MomentCtx& c, double delta, long i, long j, long k,
                          std::size_t n) {
  std::vector<double> xt(n), wt(n), xz(n), wz(n), xs(n), ws(n), xu(n), wu(n);
  quad::gauss_legendre(n, double(i) * delta, double(i + 1) * delta, xt.data(), wt.data());
  quad::gauss_legendre(n, double(j) * delta, double(j + 1) * delta, xz.data(), wz.data());
  quad::gauss_legendre(n, double(k) * delta, double(k + 1) * delta, xs.data(), ws.data());
  double total = 0.0;
  for (std::size_t is = 0; is < n; ++is) {
    quad::gauss_legendre(n, double(k) * delta, xs[is], xu.data(), wu.data());
    double plane = 0.0;
    for (std::size_t it = 0; it < n; ++it)
      for (std::size_t iz = 0; iz < n; ++iz)
        for (std::size_t iu = 0; iu < n; ++iu)
          plane += wt[it] * wz[iz] * wu[iu] * c.e4(xt[it], xz[iz], xs[is], xu[iu]);
    total += ws[is] * plane;
  }
  return total;
}

// t over box i times the ordered triple w1 <= w2 <= w3 within box j; i != j.
double t4_box_simplex3(const MomentCtx& c, double delta, long i, long j, std::size_t n) {
  std::vector<double> xt(n), wt(n), x1(n), w1(n), x2(n), w2(n), x3(n), w3(n);
  const double hi = double(j + 1) * delta;
  quad::gauss_legendre(n, double(i) * delta, double(i + 1) * delta, xt.data(), wt.data());
  quad::gauss_legendre(n, double(j) * delta, hi, x1.data(), w1.data());
  double total = 0.0;
  for (std::size_t i1 = 0; i1 < n; ++i1) {
    quad::gauss_legendre(n, x1[i1], hi, x2.data(), w2.data());
    double mid = 0.0;
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      quad::gauss_legendre(n, x2[i2], hi, x3.data(), w3.data());
      double inner = 0.0;
      for (std::size_t i3 = 0; i3 < n; ++i3)
        for (std::size_t it = 0; it < n; ++it)
          inner += w3[i3] * wt[it] * c.e4(xt[it], x1[i1], x2[i2], x3[i3]);
      mid += w2[i2] * inner;
    }
    total += w1[i1] * mid;
  }
  return total;
}

// Ordered pair z <= t within box i times ordered pair u <= s within box k;
// i != k.
double t4_ordered_ordered(const MomentCtx& c, double delta, long i, long k, std::size_t n) {
  std::vector<double> xt(n), wt(n), xz(n), wz(n), xs(n), ws(n), xu(n), wu(n);
  quad::gauss_legendre(n, double(i) * delta, double(i + 1) * delta, xt.data(), wt.data());
  quad::gauss_legendre(n, double(k) * delta, double(k + 1) * delta, xs.data(), ws.data());
  double total = 0.0;
  for (std::size_t it = 0; it < n; ++it) {
    quad::gauss_legendre(n, double(i) * delta, xt[it], xz.data(), wz.data());
    for (std::size_t is = 0; is < n; ++is) {
      quad::gauss_legendre(n, double(k) * delta, xs[is], xu.data(), wu.data());
      double plane = 0.0;
      for (std::size_t iz = 0; iz < n; ++iz)
        for (std::size_t iu = 0; iu < n; ++iu)
          plane += wz[iz] * wu[iu] * c.e4(xt[it], xz[iz], xs[is], xu[iu]);
      total += wt[it] * ws[is] * plane;
    }
  }
  return total;
}

// Fully ordered quadruple v1 <= v2 <= v3 <= v4 within box i.
double t4_simplex4(const MomentCtx& c, double delta, long i, std::size_t n) {
  std::vector<double> x1(n), w1(n), x2(n), w2(n), x3(n), w3(n), x4(n), w4(n);
  const double hi = double(i + 1) * delta;
  quad::gauss_legendre(n, double(i) * delta, hi, x1.data(), w1.data());
  double total = 0.0;
  for (std::size_t i1 = 0; i1 < n; ++i1) {
    quad::gauss_legendre(n, x1[i1], hi, x2.data(), w2.data());
    double s1 = 0.0;
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      quad::gauss_legendre(n, x2[i2], hi, x3.data(), w3.data());
      double s2 = 0.0;
      for (std::size_t i3 = 0; i3 < n; ++i3) {
        quad::gauss_legendre(n, x3[i3], hi, x4.data(), w4.data());
        double s3 = 0.0;
        for (std::size_t i4 = 0; i4 < n; ++i4)
          s3 += w4[i4] * c.e4(x1[i1], x2[i2], x3[i3], x4[i4]);
        s2 += w3[i3] * s3;
      }
      s1 += w2[i2] * s2;
    }
    total += w1[i1] * s1;
  }
  return total;
}

// s over box i, u over [i*delta, s], z over [i*delta, u], two-point moment.
double t4_tail_pair(const MomentCtx& c, double delta, long i, std::size_t n) {
  std::vector<double> xs(n), ws(n), xu(n), wu(n), xz(n), wz(n);
  const double lo = double(i) * delta;
  quad::gauss_legendre(n, lo, double(i + 1) * delta, xs.data(), ws.data());
  double total = 0.0;
  for (std::size_t is = 0; is < n; ++is) {
    quad::gauss_legendre(n, lo, xs[is], xu.data(), wu.data());
    double mid = 0.0;
    for (std::size_t iu = 0; iu < n; ++iu) {
      quad::gauss_legendre(n, lo, xu[iu], xz.data(), wz.data());
      double inner = 0.0;
      for (std::size_t iz = 0; iz < n; ++iz) inner += wz[iz] * c.e2(xu[iu], xz[iz]);
      mid += wu[iu] * inner;
    }
    total += ws[is] * mid;
  }
  return total;
}

template <typename Eval>
double escalate(Eval&& eval, double quad_tol) {
  double prev = 0.0;
  bool have_prev = false;
  for (std::size_t n : {12, 18, 27, 40, 60}) {
    const double cur = eval(n);
    if (have_prev) {
      const double diff = std::abs(cur - prev);
      if (diff <= std::max(quad_tol, 1e-11 * std::abs(cur))) return cur;
    }
    prev = cur;
    have_prev = true;
  }
  std::ostringstream os;
  os << "ordered-region moment quadrature did not converge to tolerance " << quad_tol
     << "; achieved estimate " << prev << " at the highest order";
  fail(errc::numeric, os.str());
}

[[noreturn]] void unmatched_pattern(const std::vector<long>& indices) {
  std::ostringstream os;
  os << "index pattern (";
  for (std::size_t p = 0; p < indices.size(); ++p)
    os << (p ? "," : "") << indices[p];
  os << ") does not match any tabulated coincidence case";
  fail(errc::contract, os.str());
}

}  // namespace

double a_term(const ThetaParams& theta, const LevyCumulants& levy, double delta,
              const std::vector<long>& indices, double quad_tol) {
  theta.validate();
  require(delta > 0.0, errc::contract, "delta must be positive");
  require(indices.size() == 3 || indices.size() == 4, errc::contract,
          "a_term takes 3 or 4 box indices");
  require(quad_tol > 0.0, errc::contract, "quad_tol must be positive");

  const MomentCtx ctx(theta, levy);

  // Shift to the smallest index; the stationary moments only see gaps.
  std::vector<long> v = indices;
  const long base = *std::min_element(v.begin(), v.end());
  for (long& e : v) e -= base;

  if (v.size() == 3) {
    const long i = v[0], j = v[1], k = v[2];
    if (i != j && j != k && i != k) return 0.0;
    if (i == j && j == k) {
      // All three in one box; the raw region is box x box x {u <= s}, which
      // symmetry collapses onto 3 copies of the ordered simplex.
      return escalate(
          [&](std::size_t n) { return 12.0 * 3.0 * t3_simplex(ctx, delta, i, n); }, quad_tol);
    }
    if (i != j && j == k) {
      return escalate(
          [&](std::size_t n) { return 4.0 * t3_box_ordered(ctx, delta, i, j, n); }, quad_tol);
    }
    unmatched_pattern(indices);
  }

  const long i = v[0], j = v[1], k = v[2], l = v[3];
  const bool ij = i == j, jk = j == k, kl = k == l;
  const bool ik = i == k, il = i == l, jl = j == l;

  if (ij && jk && kl) {
    // Single box: the squared integral and the ordered tail term. The first
    // region box^3 x {u <= s} collapses onto 12 copies of the full ordered
    // simplex; the second is a raw two-point moment over z <= u <= s.
    return escalate(
        [&](std::size_t n) {
          return 24.0 * 12.0 * t4_simplex4(ctx, delta, i, n) +
                 96.0 * t4_tail_pair(ctx, delta, i, n);
        },
        quad_tol);
  }
  if (ij && kl && !ik) {
    // Pair in box i against pair in box k. Symmetrizing the free pairs maps
    // all three raw regions onto the ordered-times-ordered region with
    // weights 4*2, 4*2, and 16.
    return escalate(
        [&](std::size_t n) { return 32.0 * t4_ordered_ordered(ctx, delta, i, k, n); },
        quad_tol);
  }
  if (!ij && jk && kl) {
    // Triple in box j: box x box^2 x {u <= s} collapses onto 3 copies of the
    // box-times-simplex region.
    return escalate(
        [&](std::size_t n) { return 12.0 * 3.0 * t4_box_simplex3(ctx, delta, i, j, n); },
        quad_tol);
  }
  if (!ij && !jk && !ik && kl) {
    return escalate(
        [&](std::size_t n) { return 4.0 * t4_box_box_ordered(ctx, delta, i, j, k, n); },
        quad_tol);
  }
  if (!ij && !jk && !kl && !ik && !il && !jl) return 0.0;

  unmatched_pattern(indices);
}

}  // namespace supou
