#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <unordered_map>
#include <vector>

#include <Eigen/Eigenvalues>

#include "analytics_detail.hpp"
#include "supou/errors.hpp"

namespace supou {

namespace {

constexpr long kLagCap = 500000;

// Joint cumulants of the stationary series entering a moment-function row,
// on the integer box grid. Providers cache what is expensive.
struct CumulantProvider {
  virtual ~CumulantProvider() = default;
  virtual double k1() = 0;
  virtual double k2(long gap) = 0;
  virtual double k3(long a, long b, long c) = 0;
  virtual double k4(long a, long b, long c, long d) = 0;
  // Conditional-Gaussian moment weights: a time index of multiplicity k in a
  // product of squared returns contributes (2k-1)!! times the volatility
  // moment. Off for the process itself.
  bool weighted = false;
};

struct CumKey {
  std::array<long, 4> v;
  std::size_t n;
  bool operator==(const CumKey& o) const { return n == o.n && v == o.v; }
};

struct CumKeyHash {
  std::size_t operator()(const CumKey& k) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL + k.n;
    for (std::size_t i = 0; i < k.n; ++i) {
      h ^= std::uint64_t(k.v[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return std::size_t(h);
  }
};

CumKey canonical_key(std::array<long, 4> v, std::size_t n) {
  std::sort(v.begin(), v.begin() + long(n));
  const long base = v[0];
  for (std::size_t i = 0; i < n; ++i) v[i] -= base;
  for (std::size_t i = n; i < 4; ++i) v[i] = 0;
  return {v, n};
}

// Process rows: cumulants of X on the sampling grid, all in closed form.
struct ProcessProvider final : CumulantProvider {
  ThetaParams theta;
  LevyCumulants levy;
  double delta;

  ProcessProvider(const ThetaParams& t, const LevyCumulants& l, double d)
      : theta(t), levy(l), delta(d) {}

  double k1() override { return -theta.mu / (theta.B * (theta.alpha_pi - 1.0)); }
  double k2(long gap) override { return supou_autocov(theta, double(gap) * delta); }
  double k3(long a, long b, long c) override {
    return cum3(theta, levy.m3, delta, {double(a), double(b), double(c)});
  }
  double k4(long a, long b, long c, long d) override {
    return cum4(theta, levy.m4, delta, {double(a), double(b), double(c), double(d)});
  }
};

// Squared-return rows: cumulants of integrated volatility. The second-order
// pieces are pole-free closed forms; the third and fourth orders are box
// cumulants, cached by canonical offsets for the duration of one assembly.
struct ReturnsProvider final : CumulantProvider {
  ThetaParams theta;
  LevyCumulants levy;
  double delta;
  double quad_tol;
  bool zero_high_cumulants = false;
  std::unordered_map<long, double> cov_cache;
  std::unordered_map<CumKey, double, CumKeyHash> cum_cache;

  ReturnsProvider(const ThetaParams& t, const LevyCumulants& l, double d, double qt)
      : theta(t), levy(l), delta(d), quad_tol(qt) {
    weighted = true;
  }

  double k1() override {
    return -delta * theta.mu / (theta.B * (theta.alpha_pi - 1.0));
  }
  double k2(long gap) override {
    auto it = cov_cache.find(gap);
    if (it != cov_cache.end()) return it->second;
    const double v = gap == 0 ? integrated_variance(theta, delta)
                              : returns_cov(theta, delta, gap);
    cov_cache.emplace(gap, v);
    return v;
  }
  double k3(long a, long b, long c) override {
    if (zero_high_cumulants) return 0.0;
    return cached({{a, b, c, 0}}, 3, levy.m3);
  }
  double k4(long a, long b, long c, long d) override {
    if (zero_high_cumulants) return 0.0;
    return cached({{a, b, c, d}}, 4, levy.m4);
  }

 private:
  double cached(std::array<long, 4> v, std::size_t n, double mcoef) {
    const CumKey key = canonical_key(v, n);
    auto it = cum_cache.find(key);
    if (it != cum_cache.end()) return it->second;
    const double val = detail::integrated_cum_impl(
        theta, mcoef, delta, std::vector<long>(key.v.begin(), key.v.begin() + long(n)),
        quad_tol);
    cum_cache.emplace(key, val);
    return val;
  }
};

double double_factorial_odd(long k) {
  // (2k-1)!! for multiplicities k = 1..4
  static constexpr double table[] = {1.0, 1.0, 3.0, 15.0, 105.0};
  return table[k];
}

double pattern_weight(const std::vector<long>& times, const CumulantProvider& P) {
  if (!P.weighted) return 1.0;
  double w = 1.0;
  std::vector<long> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    w *= double_factorial_odd(long(j - i));
    i = j;
  }
  return w;
}

double block_value(const std::vector<int>& blk, const std::vector<long>& t,
                   CumulantProvider& P) {
  switch (blk.size()) {
    case 1:
      return P.k1();
    case 2:
      return P.k2(std::labs(t[blk[0]] - t[blk[1]]));
    case 3:
      return P.k3(t[blk[0]], t[blk[1]], t[blk[2]]);
    default:
      return P.k4(t[blk[0]], t[blk[1]], t[blk[2]], t[blk[3]]);
  }
}

// Sum of cumulant products over set partitions of the time slots. When
// group_a > 0, only partitions with at least one block joining the first
// group_a slots to the rest are kept: that is exactly the joint moment minus
// the product of the two group moments, evaluated without cancellation.
double partition_sum(const std::vector<long>& t, CumulantProvider& P,
                     std::size_t group_a = 0) {
  const std::size_t n = t.size();
  std::vector<std::vector<int>> blocks;
  double total = 0.0;

  auto recurse = [&](auto&& self, std::size_t i) -> void {
    if (i == n) {
      if (group_a > 0) {
        bool crossing = false;
        for (const auto& blk : blocks) {
          bool has_a = false, has_b = false;
          for (int s : blk) (std::size_t(s) < group_a ? has_a : has_b) = true;
          if (has_a && has_b) {
            crossing = true;
            break;
          }
        }
        if (!crossing) return;
      }
      double prod = 1.0;
      for (const auto& blk : blocks) {
        prod *= block_value(blk, t, P);
        if (prod == 0.0) break;
      }
      total += prod;
      return;
    }
    // Deeper levels grow and shrink `blocks` past nb, so index, don't iterate.
    const std::size_t nb = blocks.size();
    for (std::size_t bi = 0; bi < nb; ++bi) {
      blocks[bi].push_back(int(i));
      self(self, i + 1);
      blocks[bi].pop_back();
    }
    blocks.push_back({int(i)});
    self(self, i + 1);
    blocks.pop_back();
  };
  recurse(recurse, 0);
  return total;
}

// One lag-sum entry: sum over l of Cov(f_A(V_0..), f_B(V_l..)) with the
// connected-partition decomposition handling coincidence weights exactly.
double entry_series(const std::vector<long>& pat_a, const std::vector<long>& pat_b,
                    CumulantProvider& P, double alpha, double b_scale, double tail_tol,
                    long& l_used) {
  const double wa = pattern_weight(pat_a, P);
  const double wb = pattern_weight(pat_b, P);
  const double psa = partition_sum(pat_a, P);
  const double psb = partition_sum(pat_b, P);

  std::vector<long> combined(pat_a);
  combined.resize(pat_a.size() + pat_b.size());

  auto term = [&](long l) {
    for (std::size_t i = 0; i < pat_b.size(); ++i)
      combined[pat_a.size() + i] = pat_b[i] + l;
    const double wc = pattern_weight(combined, P);
    double x = wc * partition_sum(combined, P, pat_a.size());
    if (wc != wa * wb) x += (wc - wa * wb) * psa * psb;
    return x;
  };

  double sum = term(0);
  double scale = std::abs(sum);
  long max_a = *std::max_element(pat_a.begin(), pat_a.end());
  long max_b = *std::max_element(pat_b.begin(), pat_b.end());
  const long warmup = max_a + max_b + 2;

  for (long l = 1;; ++l) {
    const double tp = term(l);
    const double tm = term(-l);
    sum += tp + tm;
    scale = std::max(scale, std::abs(sum));
    if (l >= warmup) {
      const double tail = 4.0 * (std::abs(tp) + std::abs(tm)) *
                          (1.0 + b_scale * double(l)) / (b_scale * (alpha - 2.0));
      if (tail <= tail_tol * scale) {
        l_used = l;
        return sum;
      }
    }
    if (l >= kLagCap) {
      std::ostringstream os;
      os << "lag sum did not meet the tail tolerance " << tail_tol << " within "
         << kLagCap << " lags; partial sum " << sum;
      fail(errc::numeric, os.str());
    }
  }
}

LagCovMatrix assemble(LagCovMatrix::Kind kind, const ThetaParams& theta, double delta,
                      std::size_t m, double tail_tol, CumulantProvider& provider) {
  const std::size_t n = m + 2;
  std::vector<std::vector<long>> patterns;
  patterns.push_back({0});
  for (std::size_t k = 0; k <= m; ++k) patterns.push_back({0, long(k)});

  LagCovMatrix out;
  out.kind = kind;
  out.tail_tol = tail_tol;
  out.mat.resize(long(n), long(n));

  const double b_scale = -theta.B * delta;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      long used = 0;
      const double v = entry_series(patterns[a], patterns[b], provider, theta.alpha_pi,
                                    b_scale, tail_tol, used);
      out.mat(long(a), long(b)) = v;
      out.mat(long(b), long(a)) = v;
      out.lag_cutoff = std::max(out.lag_cutoff, used);
    }
  }

  // Eigenvalue floor at zero: truncation can leave a marginally indefinite
  // matrix; anything beyond roundoff scale is an assembly failure.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.mat);
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev(0) < 0.0) {
    out.psd_clipped = true;
    out.clip_magnitude = -ev(0);
    const double trace = out.mat.trace();
    if (out.clip_magnitude > 1e-6 * trace) {
      std::ostringstream os;
      os << "long-run covariance is indefinite beyond roundoff: eigenvalue " << ev(0)
         << " against trace " << trace;
      fail(errc::numeric, os.str());
    }
    Eigen::VectorXd clipped = ev.cwiseMax(0.0);
    out.mat = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    out.mat = ((out.mat + out.mat.transpose()) / 2.0).eval();
  }
  return out;
}

}  // namespace

LagCovMatrix h_sigma(const ThetaParams& theta, const LevyCumulants& levy, double delta,
                     std::size_t m, double tail_tol) {
  theta.validate();
  require(delta > 0.0, errc::contract, "delta must be positive");
  require(tail_tol > 0.0 && tail_tol < 1.0, errc::contract,
          "tail_tol must be in (0, 1)");
  ProcessProvider provider(theta, levy, delta);
  return assemble(LagCovMatrix::Kind::h_sigma, theta, delta, m, tail_tol, provider);
}

LagCovMatrix w_sigma(const ThetaParams& theta, const LevyCumulants& levy, double delta,
                     std::size_t m, double tail_tol, double quad_tol,
                     bool diagnostic_pure_products) {
  theta.validate();
  require(delta > 0.0, errc::contract, "delta must be positive");
  require(tail_tol > 0.0 && tail_tol < 1.0, errc::contract,
          "tail_tol must be in (0, 1)");
  require(quad_tol > 0.0, errc::contract, "quad_tol must be positive");
  ReturnsProvider provider(theta, levy, delta, quad_tol);
  if (diagnostic_pure_products) {
    provider.zero_high_cumulants = true;
    provider.weighted = false;
  }
  return assemble(LagCovMatrix::Kind::w_sigma, theta, delta, m, tail_tol, provider);
}

}  // namespace supou
