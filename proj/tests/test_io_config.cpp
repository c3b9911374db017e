// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "reachcert/config.hpp"
#include "reachcert/io.hpp"
#include "reachcert/svg.hpp"
#include "support/chain_fixtures.hpp"
#include "support/oracles.hpp"

using namespace reachcert;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("reachcert_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

OrderedJson minimal_config() {
    return OrderedJson::parse(R"({
        "seed": 3,
        "output_dir": "out/test",
        "environment": {"name": "chain1d"},
        "region": {"bounds": [[0.0, 1.0]], "goal": [[0.6, 1.0]]},
        "partition": {"discretized_dims": [0], "cells_per_dim": [10]},
        "model": {"hidden": [], "vi": {"likelihood_sigma": 0.01}},
        "policy": {"hidden": [4], "cloning": {}},
        "control_bounds": [[-1.0, 1.0]],
        "cert": {"horizon": 4},
        "synthesis": {"action_grid": [[0.3]]},
        "mc": {"n_traj": 50}
    })");
}

} // namespace

TEST_CASE("network and posterior files round trip bit-exactly") {
    TempDir tmp;
    Rng rng(5);
    const auto arch = testsupport::random_arch(rng);
    Network net{arch, testsupport::random_weights(arch, rng)};
    save_network(net, tmp.file("net.json"));
    const Network back = load_network(tmp.file("net.json"));
    CHECK(back.arch.layer_sizes == net.arch.layer_sizes);
    CHECK(back.arch.hidden_activations == net.arch.hidden_activations);
    CHECK(back.weights == net.weights); // bit-exact

    auto post = point_posterior(net, 0.123456789123456789, 0.0456);
    for (auto& s : post.stddev) s *= rng.uniform(0.5, 1.5);
    save_posterior(post, tmp.file("post.json"));
    const auto pback = load_posterior(tmp.file("post.json"));
    CHECK(pback.mean == post.mean);
    CHECK(pback.stddev == post.stddev);
    CHECK(pback.likelihood_sigma == post.likelihood_sigma);

    // saving the loaded artifact reproduces the file byte for byte
    save_posterior(pback, tmp.file("post2.json"));
    CHECK(detail::read_text_file(tmp.file("post.json")) ==
          detail::read_text_file(tmp.file("post2.json")));
}

TEST_CASE("dataset files round trip") {
    TempDir tmp;
    Rng rng(7);
    DynamicsDataset data;
    for (int i = 0; i < 20; ++i) {
        data.records.push_back({{rng.normal(), rng.normal()},
                                {rng.uniform(-1, 1)},
                                {rng.normal(), rng.normal()}});
    }
    save_dataset(data, tmp.file("d.csv"));
    const auto back = load_dataset(tmp.file("d.csv"));
    REQUIRE(back.records.size() == data.records.size());
    for (std::size_t i = 0; i < data.records.size(); ++i) {
        CHECK(back.records[i].x == data.records[i].x);
        CHECK(back.records[i].u == data.records[i].u);
        CHECK(back.records[i].x_next == data.records[i].x_next);
    }
}

TEST_CASE("strategy files round trip through the partition") {
    TempDir tmp;
    const auto spec = testsupport::chain_region(0.6);
    const auto part = build_partition(spec, {10}, {0});
    const Network baseline = testsupport::constant_policy_1d(0.1);

    SynthesizedStrategy strat;
    strat.horizon = 3;
    strat.control_dim = 1;
    strat.baseline = baseline;
    strat.actions.assign(3, std::vector<std::optional<std::vector<double>>>(part.n_cells()));
    strat.actions[0][2] = std::vector<double>{0.25};
    strat.actions[2][5] = std::vector<double>{-0.125};

    save_strategy(strat, part, tmp.file("s.csv"));
    const auto back = load_strategy(tmp.file("s.csv"), baseline, part, 3);
    CHECK(back.actions[0][2] == strat.actions[0][2]);
    CHECK(back.actions[2][5] == strat.actions[2][5]);
    CHECK_FALSE(back.actions[1][3].has_value());
}

TEST_CASE("value table export shape") {
    TempDir tmp;
    const auto spec = testsupport::chain_region(0.6);
    const auto part = build_partition(spec, {10}, {0});
    ValueTable t;
    t.horizon = 2;
    t.n_cells = part.n_cells();
    t.values.assign(3, std::vector<double>(part.n_cells(), 0.5));
    save_value_table(t, part, tmp.file("v.csv"));
    const auto text = detail::read_text_file(tmp.file("v.csv"));
    // header plus (N+1) * n_q rows
    const auto lines = std::count(text.begin(), text.end(), '\n');
    CHECK(lines == 1 + 3 * 10);
}

TEST_CASE("config parsing") {
    SUBCASE("valid config parses with defaults applied") {
        const auto cfg = parse_config(minimal_config());
        CHECK(cfg.environment.kind == EnvKind::Chain1d);
        CHECK(cfg.cert.mode == ThresholdMode::Dyadic);
        CHECK(cfg.vi.likelihood_sigma == 0.01);
        CHECK(cfg.horizon == 4);
        CHECK(cfg.action_grid.candidates.size() == 1);
        CHECK(cfg.cert.seed == 3);
    }
    SUBCASE("unknown keys rejected at every level") {
        auto j = minimal_config();
        j["extra"] = 1;
        CHECK_THROWS_AS(parse_config(j), ConfigError);
        j = minimal_config();
        j["cert"]["bogus"] = true;
        CHECK_THROWS_AS(parse_config(j), ConfigError);
        j = minimal_config();
        j["environment"]["frictionn"] = 0.5;
        CHECK_THROWS_AS(parse_config(j), ConfigError);
    }
    SUBCASE("dimension inconsistencies rejected before compute") {
        auto j = minimal_config();
        j["region"]["bounds"] = {{0.0, 1.0}, {0.0, 1.0}};
        CHECK_THROWS_AS(parse_config(j), ConfigError);
        j = minimal_config();
        j["control_bounds"] = {{-1.0, 1.0}, {-1.0, 1.0}};
        CHECK_THROWS_AS(parse_config(j), ConfigError);
        j = minimal_config();
        j["synthesis"]["action_grid"] = {{0.3, 0.1}};
        CHECK_THROWS_AS(parse_config(j), ConfigError);
        j = minimal_config();
        j["synthesis"]["action_grid"] = {{5.0}}; // outside control bounds
        CHECK_THROWS_AS(parse_config(j), ConfigError);
        j = minimal_config();
        j["mc"]["start"] = {0.1, 0.2};
        CHECK_THROWS_AS(parse_config(j), ConfigError);
        j = minimal_config();
        j["partition"]["discretized_dims"] = {1};
        CHECK_THROWS_AS(parse_config(j), ConfigError);
    }
    SUBCASE("goal outside bounds rejected") {
        auto j = minimal_config();
        j["region"]["goal"] = {{0.6, 1.4}};
        CHECK_THROWS_AS(parse_config(j), ConfigError);
    }
    SUBCASE("ladder mode validates thresholds") {
        auto j = minimal_config();
        j["cert"]["threshold_mode"] = "ladder";
        CHECK_THROWS_AS(parse_config(j), ConfigError); // missing ladder
        j["cert"]["thresholds"] = {0.0, 0.5, 1.0};
        CHECK_NOTHROW(parse_config(j));
    }
}

TEST_CASE("heatmap svg renders deterministically and self-contained") {
    RegionSpec spec;
    spec.bounds = Box(std::vector<Interval>{Interval(-1, 1), Interval(-1, 1)});
    spec.goal = Box(std::vector<Interval>{Interval(-0.25, 0.25), Interval(-0.25, 0.25)});
    ConvexPolytope tri;
    tri.push_back({{0.0, -1.0}, 0.1});
    tri.push_back({{1.0, 1.0}, 0.8});
    tri.push_back({{-1.0, 1.0}, 0.8});
    spec.obstacles.push_back(tri);

    const auto part = build_partition(spec, {8, 8}, {0, 1});
    std::vector<double> values(part.n_cells());
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = static_cast<double>(i) / values.size();

    const auto svg1 = render_heatmap_svg(part, values, spec, "test");
    const auto svg2 = render_heatmap_svg(part, values, spec, "test");
    CHECK(svg1 == svg2);
    CHECK(svg1.find("<svg") == 0);
    CHECK(svg1.find("<polygon") != std::string::npos); // obstacle drawn
    CHECK(svg1.find("href") == std::string::npos);     // no external references
    CHECK(svg1.find("url(") == std::string::npos);
}
