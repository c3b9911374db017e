// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_TRAIN_HPP
#define REACHCERT_TRAIN_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "reachcert/mlp.hpp"
#include "reachcert/optim.hpp"
#include "reachcert/rng.hpp"

namespace reachcert {

struct RegressionConfig {
    int epochs = 400;
    double lr = 0.01;
    std::uint64_t seed = 0;
};

// Plain full-batch MSE regression; the behaviour-cloning trainer.
inline Network fit_regression(const std::vector<std::vector<double>>& inputs,
                              const std::vector<std::vector<double>>& targets,
                              const MlpArchitecture& arch, const RegressionConfig& cfg,
                              double* final_mse = nullptr) {
    arch.validate();
    if (inputs.empty() || inputs.size() != targets.size())
        throw std::invalid_argument("fit_regression: empty or mismatched data");

    Network net;
    net.arch = arch;
    net.weights.resize(arch.param_count());
    Rng rng(derive_seed(cfg.seed, 0x636c6f6e));
    for (double& w : net.weights) w = 0.3 * rng.normal();

    Adam opt(net.weights.size(), cfg.lr);
    const double scale = 1.0 / static_cast<double>(inputs.size());
    std::vector<double> grad(net.weights.size());
    double mse = 0.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        mse = 0.0;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const auto y = forward(net.arch, net.weights, inputs[i]);
            std::vector<double> upstream(y.size());
            for (std::size_t d = 0; d < y.size(); ++d) {
                const double r = targets[i][d] - y[d];
                mse += r * r;
                upstream[d] = 2.0 * r; // ascent direction on -MSE
            }
            const Gradient g = gradient(net.arch, net.weights, inputs[i], upstream);
            for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += scale * g.d_weights[j];
        }
        mse *= scale;
        if (!std::isfinite(mse)) throw std::runtime_error("fit_regression: diverged");
        opt.step(net.weights, grad);
    }
    if (final_mse) *final_mse = mse;
    return net;
}

} // namespace reachcert

#endif
