#include "kernels_impl.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

// AVX2 variants. Only mul/add intrinsics are used (no FMA), and each function
// carries its own target attribute instead of the translation unit being
// compiled with -mavx2, so the dispatcher below stays safe to run on any CPU.

namespace supou::kernels::detail {

namespace {

__attribute__((target("avx2"))) inline double reduce_lanes(__m256d acc, double tail) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  return ((lane[0] + lane[2]) + (lane[1] + lane[3])) + tail;
}

}  // namespace

__attribute__((target("avx2"))) double decay_sum_avx2(double* r, const double* d, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_mul_pd(_mm256_loadu_pd(r + i), _mm256_loadu_pd(d + i));
    _mm256_storeu_pd(r + i, v);
    acc = _mm256_add_pd(acc, v);
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double v = r[i] * d[i];
    r[i] = v;
    tail += v;
  }
  return reduce_lanes(acc, tail);
}

__attribute__((target("avx2"))) double decay_vol_avx2(double* r, const double* d,
                                                      const double* inv_a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d old = _mm256_loadu_pd(r + i);
    const __m256d v = _mm256_mul_pd(old, _mm256_loadu_pd(d + i));
    const __m256d step = _mm256_mul_pd(_mm256_sub_pd(v, old), _mm256_loadu_pd(inv_a + i));
    acc = _mm256_add_pd(acc, step);
    _mm256_storeu_pd(r + i, v);
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double v = r[i] * d[i];
    tail += (v - r[i]) * inv_a[i];
    r[i] = v;
  }
  return reduce_lanes(acc, tail);
}

__attribute__((target("avx2"))) double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i] * y[i];
  return reduce_lanes(acc, tail);
}

__attribute__((target("avx2"))) double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i];
  return reduce_lanes(acc, tail);
}

}  // namespace supou::kernels::detail

#endif
