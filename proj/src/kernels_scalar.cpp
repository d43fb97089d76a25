#include "kernels_impl.hpp"

// Reference kernels. Each loop keeps four interleaved partial accumulators
// (lane j sees elements with index congruent to j mod 4) and combines them as
// (acc0+acc2)+(acc1+acc3), the same dataflow the AVX2 variants use, so both
// backends produce identical bits. Compiled without FMA contraction.

namespace supou::kernels::detail {

double decay_sum_scalar(double* r, const double* d, std::size_t n) {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double v0 = r[i] * d[i];
    const double v1 = r[i + 1] * d[i + 1];
    const double v2 = r[i + 2] * d[i + 2];
    const double v3 = r[i + 3] * d[i + 3];
    r[i] = v0;
    r[i + 1] = v1;
    r[i + 2] = v2;
    r[i + 3] = v3;
    acc0 += v0;
    acc1 += v1;
    acc2 += v2;
    acc3 += v3;
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double v = r[i] * d[i];
    r[i] = v;
    tail += v;
  }
  return ((acc0 + acc2) + (acc1 + acc3)) + tail;
}

double decay_vol_scalar(double* r, const double* d, const double* inv_a, std::size_t n) {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double v0 = r[i] * d[i];
    const double v1 = r[i + 1] * d[i + 1];
    const double v2 = r[i + 2] * d[i + 2];
    const double v3 = r[i + 3] * d[i + 3];
    acc0 += (v0 - r[i]) * inv_a[i];
    acc1 += (v1 - r[i + 1]) * inv_a[i + 1];
    acc2 += (v2 - r[i + 2]) * inv_a[i + 2];
    acc3 += (v3 - r[i + 3]) * inv_a[i + 3];
    r[i] = v0;
    r[i + 1] = v1;
    r[i + 2] = v2;
    r[i + 3] = v3;
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double v = r[i] * d[i];
    tail += (v - r[i]) * inv_a[i];
    r[i] = v;
  }
  return ((acc0 + acc2) + (acc1 + acc3)) + tail;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 += x[i] * y[i];
    acc1 += x[i + 1] * y[i + 1];
    acc2 += x[i + 2] * y[i + 2];
    acc3 += x[i + 3] * y[i + 3];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i] * y[i];
  return ((acc0 + acc2) + (acc1 + acc3)) + tail;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 += x[i];
    acc1 += x[i + 1];
    acc2 += x[i + 2];
    acc3 += x[i + 3];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i];
  return ((acc0 + acc2) + (acc1 + acc3)) + tail;
}

}  // namespace supou::kernels::detail
