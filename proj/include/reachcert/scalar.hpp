// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_SCALAR_HPP
#define REACHCERT_SCALAR_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

namespace reachcert {

// Error function. Saturates exactly at +-1 for |x| > 6, where the true value
// differs from +-1 by less than 1e-17 anyway; certified box masses multiply
// across thousands of weights, so per-call error must stay far below the
// probability tolerances used downstream.
inline double erf(double x) {
    if (x > 6.0) return 1.0;
    if (x < -6.0) return -1.0;
    return std::erf(x);
}

// Inverse error function on (-1, 1).
// Winitzki initial guess polished with Newton steps on erf.
inline double erf_inv(double p) {
    if (!(p > -1.0 && p < 1.0))
        throw std::domain_error("erf_inv: argument must lie in (-1, 1)");
    if (p == 0.0) return 0.0;

    const double a = 0.147;
    const double ln1mp2 = std::log(1.0 - p * p);
    const double t1 = 2.0 / (3.14159265358979323846 * a) + 0.5 * ln1mp2;
    double x = std::sqrt(std::sqrt(t1 * t1 - ln1mp2 / a) - t1);
    if (p < 0.0) x = -x;

    // Newton: f(x) = erf(x) - p, f'(x) = 2/sqrt(pi) * exp(-x^2)
    const double two_over_sqrt_pi = 1.1283791670955125738961589031;
    for (int it = 0; it < 6; ++it) {
        const double err = std::erf(x) - p;
        const double deriv = two_over_sqrt_pi * std::exp(-x * x);
        if (deriv <= 0.0) break;
        const double step = err / deriv;
        x -= step;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

// P(a <= Z <= b) for Z ~ N(mean, stddev^2), in terms of erf.
inline double normal_interval_mass(double lo, double hi, double mean, double stddev) {
    const double inv = 1.0 / (1.4142135623730950488 * stddev);
    return 0.5 * (erf((hi - mean) * inv) - erf((lo - mean) * inv));
}

} // namespace reachcert

#endif
