#pragma once

#include <cstddef>

// Internal declarations shared by the kernel translation units.
namespace supou::kernels::detail {

double decay_sum_scalar(double* r, const double* d, std::size_t n);
double decay_vol_scalar(double* r, const double* d, const double* inv_a, std::size_t n);
double dot_scalar(const double* x, const double* y, std::size_t n);
double sum_scalar(const double* x, std::size_t n);

#if defined(__x86_64__) || defined(__i386__)
double decay_sum_avx2(double* r, const double* d, std::size_t n);
double decay_vol_avx2(double* r, const double* d, const double* inv_a, std::size_t n);
double dot_avx2(const double* x, const double* y, std::size_t n);
double sum_avx2(const double* x, std::size_t n);
#endif

}  // namespace supou::kernels::detail
