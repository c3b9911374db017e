// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_CONFIG_HPP
#define REACHCERT_CONFIG_HPP

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "reachcert/abstraction.hpp"
#include "reachcert/certifier.hpp"
#include "reachcert/io.hpp"
#include "reachcert/posterior.hpp"
#include "reachcert/simulation.hpp"
#include "reachcert/synthesis.hpp"
#include "reachcert/train.hpp"

namespace reachcert {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CloneConfig {
    Behavior data_behavior = Behavior::ScriptedProportional;
    int episodes = 30;
    int steps = 25;
    double exploration_noise = 0.1;
    RegressionConfig regression;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    Environment environment;
    RegionSpec region;
    std::vector<std::size_t> discretized_dims;
    std::vector<int> cells_per_dim;

    MlpArchitecture model_arch;
    ViConfig vi;
    MlpArchitecture policy_arch;
    CloneConfig cloning;

    Box control_bounds{std::vector<Interval>{Interval(-1, 1)}};
    CertConfig cert;
    int horizon = 5;

    ActionGrid action_grid;
    int improve_steps = 0;
    double improve_step_size = 0.25;

    long n_traj = 100;
    std::vector<double> mc_start; // empty: no explicit start configured

    Partition build_grid() const {
        return build_partition(region, cells_per_dim, discretized_dims);
    }

    // one seed drives every stochastic stage
    void set_seed(std::uint64_t s) {
        seed = s;
        vi.seed = s;
        cert.seed = s;
        cloning.regression.seed = s;
    }
};

namespace detail {

inline void reject_unknown_keys(const OrderedJson& j, const std::set<std::string>& known,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
}

inline Box box_from_json(const OrderedJson& j, const std::string& where) {
    std::vector<Interval> dims;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2)
            throw ConfigError(where + ": expected [lo, hi] pairs");
        const double lo = pair[0].get<double>(), hi = pair[1].get<double>();
        if (!(lo <= hi)) throw ConfigError(where + ": lo > hi");
        dims.emplace_back(lo, hi);
    }
    if (dims.empty()) throw ConfigError(where + ": empty box");
    return Box(std::move(dims));
}

inline MlpArchitecture arch_from_config(const OrderedJson& j, int input, int output,
                                        const std::string& where) {
    reject_unknown_keys(j, {"hidden", "activation"}, where);
    std::vector<int> sizes{input};
    for (const auto& h : j.value("hidden", std::vector<int>{})) sizes.push_back(h);
    sizes.push_back(output);
    const std::string act = j.value("activation", std::string("tanh"));
    return MlpArchitecture::uniform(std::move(sizes), activation_from_name(act));
}

} // namespace detail

inline ExperimentConfig parse_config(const OrderedJson& j) {
    using detail::reject_unknown_keys;
    reject_unknown_keys(j,
                        {"seed", "output_dir", "environment", "region", "partition", "model",
                         "policy", "control_bounds", "cert", "synthesis", "mc"},
                        "config");
    ExperimentConfig cfg;
    cfg.set_seed(j.value("seed", 0ULL));
    cfg.output_dir = j.value("output_dir", std::string("out"));

    // environment
    {
        const auto& je = j.at("environment");
        reject_unknown_keys(je, {"name", "h", "eta_friction", "mass", "gravity"},
                            "environment");
        cfg.environment.kind = env_kind_from_name(je.at("name").get<std::string>());
        cfg.environment.h = je.value("h", 0.1);
        cfg.environment.eta_friction = je.value("eta_friction", 0.5);
        cfg.environment.mass = je.value("mass", 1.0);
        cfg.environment.gravity = je.value("gravity", 0.1);
    }
    const int n = cfg.environment.state_dim();
    const int c = cfg.environment.control_dim();

    // region
    {
        const auto& jr = j.at("region");
        reject_unknown_keys(jr, {"bounds", "goal", "obstacles"}, "region");
        cfg.region.bounds = detail::box_from_json(jr.at("bounds"), "region.bounds");
        cfg.region.goal = detail::box_from_json(jr.at("goal"), "region.goal");
        if (static_cast<int>(cfg.region.bounds.dim()) != n)
            throw ConfigError("region.bounds dimension != environment state dim");
        for (const auto& jp : jr.value("obstacles", OrderedJson::array())) {
            ConvexPolytope poly;
            for (const auto& jh : jp) {
                reject_unknown_keys(jh, {"a", "b"}, "obstacle half-plane");
                poly.push_back({jh.at("a").get<std::vector<double>>(), jh.at("b").get<double>()});
            }
            cfg.region.obstacles.push_back(std::move(poly));
        }
        try {
            cfg.region.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }

    // partition
    {
        const auto& jp = j.at("partition");
        reject_unknown_keys(jp, {"discretized_dims", "cells_per_dim"}, "partition");
        cfg.discretized_dims = jp.at("discretized_dims").get<std::vector<std::size_t>>();
        cfg.cells_per_dim = jp.at("cells_per_dim").get<std::vector<int>>();
        if (cfg.discretized_dims.size() != cfg.cells_per_dim.size())
            throw ConfigError("partition: discretized_dims and cells_per_dim sizes differ");
        for (auto d : cfg.discretized_dims)
            if (d >= static_cast<std::size_t>(n))
                throw ConfigError("partition: discretized dim out of range");
        for (const auto& poly : cfg.region.obstacles)
            for (const auto& hp : poly)
                if (hp.a.size() != cfg.discretized_dims.size())
                    throw ConfigError("obstacle half-planes must match discretized dims");
    }

    // model
    {
        const auto& jm = j.at("model");
        reject_unknown_keys(jm, {"hidden", "activation", "vi", "data_behavior"}, "model");
        OrderedJson arch_part;
        if (jm.contains("hidden")) arch_part["hidden"] = jm.at("hidden");
        if (jm.contains("activation")) arch_part["activation"] = jm.at("activation");
        cfg.model_arch = detail::arch_from_config(arch_part, n + c, n, "model");
        const std::string behavior =
            jm.value("data_behavior", std::string("scripted-proportional"));
        if (behavior == "random")
            cfg.cloning.data_behavior = Behavior::Random;
        else if (behavior == "scripted-proportional")
            cfg.cloning.data_behavior = Behavior::ScriptedProportional;
        else
            throw ConfigError("model.data_behavior must be random or scripted-proportional");
        const auto& jv = jm.at("vi");
        reject_unknown_keys(
            jv, {"epochs", "lr", "mc_samples", "prior_stddev", "likelihood_sigma"}, "model.vi");
        cfg.vi.epochs = jv.value("epochs", 1000);
        cfg.vi.lr = jv.value("lr", 0.02);
        cfg.vi.mc_samples = jv.value("mc_samples", 1);
        cfg.vi.prior_stddev = jv.value("prior_stddev", 1.0);
        cfg.vi.likelihood_sigma = jv.at("likelihood_sigma").get<double>();
        if (!(cfg.vi.likelihood_sigma > 0.0))
            throw ConfigError("model.vi.likelihood_sigma must be positive");
    }

    // policy
    {
        const auto& jp = j.at("policy");
        reject_unknown_keys(jp, {"hidden", "activation", "cloning"}, "policy");
        OrderedJson arch_part;
        if (jp.contains("hidden")) arch_part["hidden"] = jp.at("hidden");
        if (jp.contains("activation")) arch_part["activation"] = jp.at("activation");
        cfg.policy_arch = detail::arch_from_config(arch_part, n, c, "policy");
        const auto& jc = jp.at("cloning");
        reject_unknown_keys(jc, {"episodes", "steps", "exploration_noise", "epochs", "lr"},
                            "policy.cloning");
        cfg.cloning.episodes = jc.value("episodes", 30);
        cfg.cloning.steps = jc.value("steps", 25);
        cfg.cloning.exploration_noise = jc.value("exploration_noise", 0.1);
        cfg.cloning.regression.epochs = jc.value("epochs", 400);
        cfg.cloning.regression.lr = jc.value("lr", 0.01);
        if (cfg.cloning.episodes < 1 || cfg.cloning.steps < 1)
            throw ConfigError("policy.cloning: positive episode/step counts required");
    }

    // control bounds
    cfg.control_bounds = detail::box_from_json(j.at("control_bounds"), "control_bounds");
    if (static_cast<int>(cfg.control_bounds.dim()) != c)
        throw ConfigError("control_bounds dimension != environment control dim");

    // certification
    {
        const auto& jc = j.at("cert");
        reject_unknown_keys(jc,
                            {"horizon", "n_s", "rho_w", "rho_x", "eta", "threshold_mode",
                             "thresholds", "dyadic_levels", "weight_subset"},
                            "cert");
        cfg.horizon = jc.at("horizon").get<int>();
        if (cfg.horizon < 0) throw ConfigError("cert.horizon must be >= 0");
        cfg.cert.n_s = jc.value("n_s", 100);
        cfg.cert.rho_w = jc.value("rho_w", 0.05);
        cfg.cert.rho_x = jc.value("rho_x", 0.1);
        cfg.cert.eta = jc.value("eta", 0.99);
        cfg.cert.dyadic_levels = jc.value("dyadic_levels", 1024);
        const std::string mode = jc.value("threshold_mode", std::string("dyadic"));
        if (mode == "dyadic")
            cfg.cert.mode = ThresholdMode::Dyadic;
        else if (mode == "heuristic")
            cfg.cert.mode = ThresholdMode::Heuristic;
        else if (mode == "ladder")
            cfg.cert.mode = ThresholdMode::Ladder;
        else
            throw ConfigError("cert.threshold_mode must be dyadic, heuristic or ladder");
        cfg.cert.thresholds = jc.value("thresholds", std::vector<double>{});
        cfg.cert.weight_subset = jc.value("weight_subset", std::vector<std::size_t>{});
        try {
            cfg.cert.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }

    // synthesis
    if (j.contains("synthesis")) {
        const auto& js = j.at("synthesis");
        reject_unknown_keys(js, {"action_grid", "improve_steps", "improve_step_size"},
                            "synthesis");
        for (const auto& ju : js.value("action_grid", OrderedJson::array())) {
            const auto u = ju.get<std::vector<double>>();
            if (static_cast<int>(u.size()) != c)
                throw ConfigError("synthesis.action_grid entries must match control dim");
            if (!cfg.control_bounds.contains(u))
                throw ConfigError("synthesis.action_grid entries must lie in control_bounds");
            cfg.action_grid.candidates.push_back(u);
        }
        cfg.improve_steps = js.value("improve_steps", 0);
        cfg.improve_step_size = js.value("improve_step_size", 0.25);
        if (cfg.improve_steps < 0) throw ConfigError("synthesis.improve_steps must be >= 0");
        if (!(cfg.improve_step_size > 0.0))
            throw ConfigError("synthesis.improve_step_size must be positive");
    }

    // monte carlo
    {
        const auto& jm = j.at("mc");
        reject_unknown_keys(jm, {"n_traj", "start"}, "mc");
        cfg.n_traj = jm.value("n_traj", 100L);
        if (cfg.n_traj < 1) throw ConfigError("mc.n_traj must be >= 1");
        cfg.mc_start = jm.value("start", std::vector<double>{});
        if (!cfg.mc_start.empty() && static_cast<int>(cfg.mc_start.size()) != n)
            throw ConfigError("mc.start dimension != state dim");
    }

    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    OrderedJson j;
    try {
        j = OrderedJson::parse(detail::read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(j);
}

} // namespace reachcert

#endif
