// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Shared 1D chain fixtures: hand-built networks realizing known dynamics,
// used across certifier, synthesis and acceptance tests.
#ifndef REACHCERT_TESTS_CHAIN_FIXTURES_HPP
#define REACHCERT_TESTS_CHAIN_FIXTURES_HPP

#include "reachcert/abstraction.hpp"
#include "reachcert/certifier.hpp"
#include "reachcert/mlp.hpp"
#include "reachcert/posterior.hpp"

namespace testsupport {

// f(x, u) = x + u, exactly, as a single linear layer
inline reachcert::Network chain_linear_net() {
    return {reachcert::MlpArchitecture({2, 1}, {}), {1.0, 1.0, 0.0}};
}

// f(x, u) = clamp(x + u, 0, 1) via two relu stages:
// 1 - relu(1 - relu(x + u))
inline reachcert::Network chain_clamp_net() {
    return {reachcert::MlpArchitecture({1 + 1, 1, 1, 1},
                                       {reachcert::Activation::Relu, reachcert::Activation::Relu}),
            {1.0, 1.0, 0.0, -1.0, 1.0, -1.0, 1.0}};
}

// constant policy pi(x) = u0
inline reachcert::Network constant_policy_1d(double u0) {
    return {reachcert::MlpArchitecture({1, 1}, {}), {0.0, u0}};
}

// linear policy pi(x) = slope * x + intercept
inline reachcert::Network linear_policy_1d(double slope, double intercept) {
    return {reachcert::MlpArchitecture({1, 1}, {}), {slope, intercept}};
}

// Together with chain_linear_net this closes the loop x' = (1-rate) x +
// rate * target: a contraction onto the target that never leaves [0, 1],
// so no probability mass is lost at the domain boundary.
inline reachcert::Network contraction_policy_1d(double rate, double target) {
    return linear_policy_1d(-rate, rate * target);
}

inline reachcert::RegionSpec chain_region_centered() {
    reachcert::RegionSpec spec;
    spec.bounds = reachcert::Box(std::vector<reachcert::Interval>{reachcert::Interval(0, 1)});
    spec.goal =
        reachcert::Box(std::vector<reachcert::Interval>{reachcert::Interval(0.4, 0.6)});
    return spec;
}

inline reachcert::RegionSpec chain_region(double goal_lo = 0.8) {
    reachcert::RegionSpec spec;
    spec.bounds = reachcert::Box(std::vector<reachcert::Interval>{reachcert::Interval(0, 1)});
    spec.goal =
        reachcert::Box(std::vector<reachcert::Interval>{reachcert::Interval(goal_lo, 1.0)});
    return spec;
}

} // namespace testsupport

#endif
