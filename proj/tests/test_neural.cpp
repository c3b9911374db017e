// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "reachcert/mlp.hpp"
#include "reachcert/rng.hpp"
#include "support/oracles.hpp"

using namespace reachcert;

TEST_CASE("architecture validation and parameter count") {
    CHECK_THROWS_AS(MlpArchitecture({3}, {}), std::invalid_argument);
    CHECK_THROWS_AS(MlpArchitecture({3, 0, 2}, {Activation::Relu}), std::invalid_argument);
    CHECK_THROWS_AS(MlpArchitecture({3, 4, 2}, {}), std::invalid_argument);

    const MlpArchitecture a({2, 3, 1}, {Activation::Tanh});
    CHECK(a.param_count() == 2 * 3 + 3 + 3 * 1 + 1);
    CHECK(a.layer_offset(1) == 9);
}

TEST_CASE("forward identity and dead relu") {
    // single linear layer, W = I, b = 0
    MlpArchitecture id({3, 3}, {});
    WeightVector w(id.param_count(), 0.0);
    w[0] = w[4] = w[8] = 1.0;
    const std::vector<double> x{0.3, -1.2, 4.0};
    CHECK(forward(id, w, x) == x);

    // relu net with all-negative pre-activations: output equals output bias
    MlpArchitecture relu_net({1, 2, 1}, {Activation::Relu});
    WeightVector rw(relu_net.param_count(), 0.0);
    rw[0] = 1.0;
    rw[1] = 1.0;          // weights into hidden
    rw[2] = rw[3] = -5.0; // hidden biases force negative pre-activations
    rw[4] = 2.0;
    rw[5] = 3.0; // output weights
    rw[6] = 0.7; // output bias
    CHECK(forward(relu_net, rw, {0.5})[0] == doctest::Approx(0.7));
}

TEST_CASE("forward matches the reference evaluator") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const auto arch = testsupport::random_arch(rng);
        const auto w = testsupport::random_weights(arch, rng);
        std::vector<double> x(arch.input_dim());
        for (auto& v : x) v = rng.uniform(-2, 2);
        const auto got = forward(arch, w, x);
        const auto want = testsupport::reference_forward(arch, w, x);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("gradient: linear case and zero upstream") {
    MlpArchitecture lin({1, 1}, {});
    WeightVector w{1.5, 0.2}; // weight, bias
    const Gradient g = gradient(lin, w, {2.0}, {1.0});
    CHECK(g.d_weights[0] == doctest::Approx(2.0)); // d/dw of w*x
    CHECK(g.d_weights[1] == doctest::Approx(1.0)); // d/db
    CHECK(g.d_input[0] == doctest::Approx(1.5));

    const Gradient z = gradient(lin, w, {2.0}, {0.0});
    CHECK(z.d_weights[0] == 0.0);
    CHECK(z.d_weights[1] == 0.0);
}

TEST_CASE("gradient matches central finite differences") {
    Rng rng(77);
    const double h = 1e-5;
    double max_rel = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        // tanh nets only: relu kinks break finite differences
        const int nin = 1 + static_cast<int>(rng.next_u64() % 3);
        const int nh = 1 + static_cast<int>(rng.next_u64() % 4);
        const int nout = 1 + static_cast<int>(rng.next_u64() % 2);
        MlpArchitecture arch({nin, nh, nout}, {Activation::Tanh});
        auto w = testsupport::random_weights(arch, rng);
        std::vector<double> x(nin), up(nout);
        for (auto& v : x) v = rng.uniform(-1.5, 1.5);
        for (auto& v : up) v = rng.uniform(-1, 1);

        const Gradient g = gradient(arch, w, x, up);
        auto loss = [&](const WeightVector& wv) {
            const auto y = forward(arch, wv, x);
            double acc = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) acc += up[i] * y[i];
            return acc;
        };
        for (std::size_t j = 0; j < w.size(); ++j) {
            WeightVector wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            const double fd = (loss(wp) - loss(wm)) / (2 * h);
            const double denom = std::max(1.0, std::abs(fd));
            max_rel = std::max(max_rel, std::abs(fd - g.d_weights[j]) / denom);
        }
        // input gradient too
        for (std::size_t j = 0; j < x.size(); ++j) {
            auto xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            auto eval = [&](const std::vector<double>& xv) {
                const auto y = forward(arch, w, xv);
                double acc = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i) acc += up[i] * y[i];
                return acc;
            };
            const double fd = (eval(xp) - eval(xm)) / (2 * h);
            const double denom = std::max(1.0, std::abs(fd));
            max_rel = std::max(max_rel, std::abs(fd - g.d_input[j]) / denom);
        }
    }
    CHECK(max_rel < 1e-4);
}

TEST_CASE("forward stays finite on bounded inputs") {
    Rng rng(13);
    MlpArchitecture arch({3, 8, 8, 2}, {Activation::Tanh, Activation::Tanh});
    const auto w = testsupport::random_weights(arch, rng, 3.0);
    for (int s = 0; s < 1000; ++s) {
        std::vector<double> x(3);
        for (auto& v : x) v = rng.uniform(-50, 50);
        for (double y : forward(arch, w, x)) CHECK(std::isfinite(y));
    }
}

TEST_CASE("dimension mismatches rejected") {
    MlpArchitecture arch({2, 2}, {});
    WeightVector w(arch.param_count(), 0.0);
    CHECK_THROWS_AS(forward(arch, w, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(gradient(arch, w, {1.0, 2.0}, {1.0}), std::invalid_argument);
    WeightVector bad(3, 0.0);
    CHECK_THROWS_AS(forward(arch, bad, {1.0, 2.0}), std::invalid_argument);
}
