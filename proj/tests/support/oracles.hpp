// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Test-only reference implementations. These stay independent of the
// library paths they check: quadrature instead of erf, a naive evaluator
// instead of the layered forward pass, Monte Carlo instead of closed forms.
#ifndef REACHCERT_TESTS_ORACLES_HPP
#define REACHCERT_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "reachcert/interval.hpp"
#include "reachcert/mlp.hpp"
#include "reachcert/rng.hpp"

namespace testsupport {

// adaptive Simpson quadrature
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

inline double gauss_pdf(double x, double mean, double stddev) {
    const double z = (x - mean) / stddev;
    return std::exp(-0.5 * z * z) / (stddev * 2.5066282746310005024);
}

// Gaussian interval mass by quadrature; the oracle for erf-based masses.
inline double gauss_mass_quadrature(double lo, double hi, double mean, double stddev,
                                    double tol = 1e-12) {
    const double a = std::max(lo, mean - 10.0 * stddev);
    const double b = std::min(hi, mean + 10.0 * stddev);
    if (!(b > a)) return 0.0;
    return integrate([=](double x) { return gauss_pdf(x, mean, stddev); }, a, b, tol);
}

// erf by quadrature of the Gaussian density
inline double erf_quadrature(double x) {
    if (x == 0.0) return 0.0;
    const double s = x > 0 ? 1.0 : -1.0;
    const double ax = std::min(std::abs(x), 7.0);
    const double v =
        integrate([](double t) { return 2.0 / std::sqrt(3.14159265358979323846) *
                                        std::exp(-t * t); },
                  0.0, ax, 1e-13);
    return s * v;
}

// slow reference MLP evaluator, written against the documented weight layout
// but with its own loops
inline std::vector<double> reference_forward(const reachcert::MlpArchitecture& arch,
                                             const reachcert::WeightVector& w,
                                             std::vector<double> h) {
    std::size_t pos = 0;
    for (std::size_t l = 0; l + 1 < arch.layer_sizes.size(); ++l) {
        const int nin = arch.layer_sizes[l], nout = arch.layer_sizes[l + 1];
        std::vector<std::vector<double>> mat(nout, std::vector<double>(nin));
        for (int o = 0; o < nout; ++o)
            for (int i = 0; i < nin; ++i) mat[o][i] = w[pos++];
        std::vector<double> bias(nout);
        for (int o = 0; o < nout; ++o) bias[o] = w[pos++];
        std::vector<double> z(nout, 0.0);
        for (int o = 0; o < nout; ++o) {
            z[o] = bias[o];
            for (int i = 0; i < nin; ++i) z[o] += mat[o][i] * h[i];
        }
        if (l + 2 < arch.layer_sizes.size()) {
            for (double& v : z)
                v = arch.hidden_activations[l] == reachcert::Activation::Relu ? std::max(0.0, v)
                                                                              : std::tanh(v);
        }
        h = std::move(z);
    }
    return h;
}

// random architectures/weights for property tests
inline reachcert::MlpArchitecture random_arch(reachcert::Rng& rng, int max_in = 4,
                                              int max_hidden = 6, int max_out = 4) {
    const int n_hidden = static_cast<int>(rng.next_u64() % 3); // 0..2 hidden layers
    std::vector<int> sizes;
    sizes.push_back(1 + static_cast<int>(rng.next_u64() % max_in));
    for (int l = 0; l < n_hidden; ++l)
        sizes.push_back(1 + static_cast<int>(rng.next_u64() % max_hidden));
    sizes.push_back(1 + static_cast<int>(rng.next_u64() % max_out));
    std::vector<reachcert::Activation> acts;
    for (int l = 0; l < n_hidden; ++l)
        acts.push_back((rng.next_u64() & 1) ? reachcert::Activation::Relu
                                            : reachcert::Activation::Tanh);
    return reachcert::MlpArchitecture(std::move(sizes), std::move(acts));
}

inline reachcert::WeightVector random_weights(const reachcert::MlpArchitecture& arch,
                                              reachcert::Rng& rng, double scale = 1.0) {
    reachcert::WeightVector w(arch.param_count());
    for (double& v : w) v = scale * rng.normal();
    return w;
}

inline std::vector<double> random_point(const reachcert::Box& box, reachcert::Rng& rng) {
    std::vector<double> x(box.dim());
    for (std::size_t i = 0; i < box.dim(); ++i) x[i] = rng.uniform(box[i].lo, box[i].hi);
    return x;
}

} // namespace testsupport

#endif
