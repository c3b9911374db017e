// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_OPTIM_HPP
#define REACHCERT_OPTIM_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace reachcert {

// Plain Adam; shared by the VI trainer and behaviour cloning.
struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    std::vector<double> m, v;
    long t = 0;

    explicit Adam(std::size_t n, double learning_rate)
        : lr(learning_rate), m(n, 0.0), v(n, 0.0) {}

    // ascent step: params += scaled gradient
    void step(std::vector<double>& params, const std::vector<double>& grad) {
        ++t;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            params[i] += lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

} // namespace reachcert

#endif
