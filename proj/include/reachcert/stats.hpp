// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_STATS_HPP
#define REACHCERT_STATS_HPP

#include <cmath>
#include <stdexcept>

namespace reachcert {

namespace detail {

// regularized incomplete beta I_x(a, b) via Lentz continued fraction
inline double betacf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-14) break;
    }
    return h;
}

inline double betainc(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(b) - std::lgamma(a) +
                          b * std::log1p(-x) + a * std::log(x)) *
                     betacf(b, a, 1.0 - x) / b;
}

// inverse of I_x(a, b) by bisection; monotone, so this is robust
inline double betainc_inv(double a, double b, double p) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (betainc(a, b, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

struct BinomialInterval {
    double p_hat = 0.0;
    double lo = 0.0;
    double hi = 1.0;
};

// Exact (Clopper-Pearson) two-sided confidence interval for k successes out
// of n trials.
inline BinomialInterval clopper_pearson(long k, long n, double confidence = 0.95) {
    if (n < 1 || k < 0 || k > n) throw std::invalid_argument("clopper_pearson: bad counts");
    const double alpha = 1.0 - confidence;
    BinomialInterval ci;
    ci.p_hat = static_cast<double>(k) / static_cast<double>(n);
    ci.lo = (k == 0) ? 0.0
                     : detail::betainc_inv(static_cast<double>(k),
                                           static_cast<double>(n - k + 1), alpha / 2.0);
    ci.hi = (k == n) ? 1.0
                     : detail::betainc_inv(static_cast<double>(k + 1), static_cast<double>(n - k),
                                           1.0 - alpha / 2.0);
    return ci;
}

} // namespace reachcert

#endif
