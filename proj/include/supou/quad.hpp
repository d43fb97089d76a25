#pragma once

#include <cstddef>
#include <functional>

namespace supou::quad {

// Adaptive Gauss-Kronrod (61-point rule) on a finite interval. Throws a
// numeric error carrying the achieved estimate and error bound when the
// requested tolerance cannot be met. Safe to call from inside another
// integrand (each nesting depth gets its own workspace).
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 double rel_tol = 0.0);

// Adaptive integration on [a, +inf).
double integrate_upper(const std::function<double(double)>& f, double a, double abs_tol,
                       double rel_tol = 0.0);

// Adaptive integration on (-inf, b].
double integrate_lower(const std::function<double(double)>& f, double b, double abs_tol,
                       double rel_tol = 0.0);

// Fixed-order Gauss-Legendre rule on [a,b]; fills x[0..n) and w[0..n).
// Node tables are cached per order.
void gauss_legendre(std::size_t n, double a, double b, double* x, double* w);

}  // namespace supou::quad
