#pragma once

#include <vector>

#include "supou/analytics.hpp"

// Internal analytics plumbing shared between the cumulant integrals, the
// covariance-matrix assembly, and their tests.
namespace supou::detail {

// Box cumulant of integrated volatility with a strictly separated minimum box
// (after canonicalization: offsets[0] == 0, offsets[1] >= 1). w is the offset
// gap sum. Pole-free in alpha_pi > 2 for every w.
double k3_strict(const ThetaParams& theta, double m3, double delta, long w);
double k4_strict(const ThetaParams& theta, double m4, double delta, long w);

// Nested Gauss-Legendre box integral of the un-integrated cumulant over
// arbitrary (possibly coinciding) boxes; offsets canonical sorted, first 0.
double k_box_quad(const ThetaParams& theta, double mcoef, double delta,
                  const std::vector<long>& offsets, double quad_tol);

// Full dispatch used by integrated_cum and the matrix assembly: canonicalizes
// indices, picks the strict reduction or the box quadrature.
double integrated_cum_impl(const ThetaParams& theta, double mcoef, double delta,
                           std::vector<long> indices, double quad_tol);

}  // namespace supou::detail
