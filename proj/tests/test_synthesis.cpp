// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "reachcert/synthesis.hpp"
#include "support/chain_fixtures.hpp"

using namespace reachcert;

namespace {

struct ChainSetup {
    RegionSpec spec = testsupport::chain_region(0.6);
    Partition part;
    DiagGaussianPosterior post;
    CertConfig cfg;

    ChainSetup() {
        part = build_partition(spec, {20}, {0});
        post = point_posterior(testsupport::chain_linear_net(), 0.005, 0.004);
        cfg.n_s = 40;
        cfg.rho_w = 0.01;
        cfg.rho_x = 0.3;
        cfg.seed = 7;
    }
};

} // namespace

TEST_CASE("singleton grid reproduces certification exactly") {
    ChainSetup s;
    const Network baseline = testsupport::constant_policy_1d(0.2);
    const ValueTable certified = certify(s.post, baseline, s.part, 6, s.cfg);
    const auto [strat, table] = synthesize_grid(s.post, baseline, s.part, 6, {}, s.cfg);
    CHECK(table.values == certified.values);
    // no stored action anywhere: the baseline won every cell
    for (int k = 0; k < 6; ++k)
        for (std::size_t i = 0; i < s.part.n_cells(); ++i)
            CHECK_FALSE(strat.actions[k][i].has_value());
}

TEST_CASE("synthesis dominates certification pointwise under shared seeds") {
    ChainSetup s;
    const Network baseline = testsupport::constant_policy_1d(0.1);
    ActionGrid grid;
    grid.candidates = {{-0.3}, {0.0}, {0.3}};
    const ValueTable certified = certify(s.post, baseline, s.part, 6, s.cfg);
    const auto [strat, table] = synthesize_grid(s.post, baseline, s.part, 6, grid, s.cfg);
    for (std::size_t i = 0; i < s.part.n_cells(); ++i)
        CHECK(table.values[0][i] >= certified.values[0][i]);
}

TEST_CASE("wrong-signed baseline is corrected by the action grid") {
    ChainSetup s;
    // pushes away from the goal; trajectories drift out at 0
    const Network baseline = testsupport::constant_policy_1d(-0.3);
    ActionGrid grid;
    grid.candidates = {{-0.3}, {0.0}, {0.3}};

    const ValueTable certified = certify(s.post, baseline, s.part, 6, s.cfg);
    const auto [strat, table] = synthesize_grid(s.post, baseline, s.part, 6, grid, s.cfg);

    double mean_base = 0.0, mean_synth = 0.0;
    int n_safe = 0, strict = 0;
    for (const auto& cell : s.part.cells) {
        if (cell.label != CellLabel::Safe) continue;
        ++n_safe;
        mean_base += certified.values[0][cell.id];
        mean_synth += table.values[0][cell.id];
        if (table.values[0][cell.id] > certified.values[0][cell.id]) ++strict;
    }
    mean_base /= n_safe;
    mean_synth /= n_safe;
    CHECK(strict >= 1);
    CHECK(mean_synth - mean_base >= 0.2);

    // synthesized actions come from the declared compact set
    const Box u_set(std::vector<Interval>{Interval(-0.3, 0.3)});
    for (int k = 0; k < 6; ++k)
        for (std::size_t i = 0; i < s.part.n_cells(); ++i)
            if (strat.actions[k][i])
                CHECK(u_set.contains(*strat.actions[k][i]));

    // the strategy lookup prefers stored actions and falls back to baseline
    bool saw_stored = false;
    for (const auto& cell : s.part.cells) {
        if (cell.label != CellLabel::Safe) continue;
        if (strat.actions[0][cell.id]) {
            const auto u = strat.action_at(s.part, cell.box.center(), 0);
            CHECK(u == *strat.actions[0][cell.id]);
            saw_stored = true;
        }
    }
    CHECK(saw_stored);
    const auto outside = strat.action_at(s.part, {5.0}, 0);
    CHECK(outside[0] == doctest::Approx(-0.3)); // baseline fallback
}

TEST_CASE("improve_policy") {
    ChainSetup s;
    s.cfg.n_s = 25;
    const auto part15 = build_partition(s.spec, {15}, {0});

    SUBCASE("steps = 0 returns the policy unchanged") {
        const Network baseline = testsupport::constant_policy_1d(-0.3);
        const Network out = improve_policy(s.post, baseline, part15, 5, s.cfg, 0, 0.25);
        CHECK(out.weights == baseline.weights);
    }

    SUBCASE("wrong-signed baseline improves; accepted objectives non-decreasing") {
        const Network baseline = testsupport::constant_policy_1d(-0.3);
        std::vector<double> trace;
        const Network out = improve_policy(s.post, baseline, part15, 5, s.cfg, 200, 0.25, &trace);

        REQUIRE(trace.size() >= 2); // at least one accepted step
        for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1]);
        CHECK(trace.back() > trace.front());

        const double before =
            certified_objective(certify(s.post, baseline, part15, 5, s.cfg), part15);
        const double after = certified_objective(certify(s.post, out, part15, 5, s.cfg), part15);
        CHECK(after >= before);
        CHECK(after > 0.0);
    }
}
