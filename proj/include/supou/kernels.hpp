#pragma once

#include <cstddef>
#include <string>

namespace supou::kernels {

// Flat-array inner loops behind the path simulator and the empirical moment
// sums. The scalar and AVX2 backends share the same blocked accumulation
// order (four interleaved partial sums, tree-combined), so their results are
// bit-identical; the backend is picked once at runtime from CPU features and
// can be overridden for testing.
struct Ops {
  // In place r[i] *= d[i]; returns the sum of the updated r[i].
  double (*decay_sum)(double* r, const double* d, std::size_t n);
  // One integrated step: v = r[i]*d[i]; acc += (v - r[i]) * inv_a[i];
  // r[i] = v. Returns acc.
  double (*decay_vol)(double* r, const double* d, const double* inv_a, std::size_t n);
  // Inner product of x and y.
  double (*dot)(const double* x, const double* y, std::size_t n);
  // Plain sum of x.
  double (*sum)(const double* x, std::size_t n);
  const char* name;
};

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(__i386__)
const Ops& avx2_ops();
#endif

bool avx2_supported();

// Active backend; defaults to AVX2 when the CPU supports it.
const Ops& ops();

// Select "auto", "scalar" or "avx2". Throws a contract error for unknown
// names or when AVX2 is requested on a CPU without it.
void set_backend(const std::string& name);

std::string backend_name();

}  // namespace supou::kernels
