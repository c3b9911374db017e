// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: train models, certify and synthesize policies,
// simulate the learned system and compare certificates against Monte-Carlo
// estimates.
//
// Exit codes: 0 success, 2 config error, 3 I/O error, 4 training failure,
// 5 certified bound exceeds the Monte-Carlo upper confidence limit.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "reachcert/config.hpp"
#include "reachcert/io.hpp"
#include "reachcert/simulation.hpp"
#include "reachcert/svg.hpp"
#include "reachcert/synthesis.hpp"
#include "reachcert/train.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitTraining = 4;
constexpr int kExitSoundness = 5;

using reachcert::OrderedJson;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
};

struct Session {
    reachcert::ExperimentConfig cfg;
    OrderedJson config_echo;
};

Session open_session(const CommonOpts& opts) {
    Session s;
    OrderedJson j;
    try {
        j = OrderedJson::parse(reachcert::detail::read_text_file(opts.config_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw reachcert::ConfigError(std::string("config parse error: ") + e.what());
    }
    s.cfg = reachcert::parse_config(j);
    s.config_echo = j;
    if (opts.seed) {
        s.cfg.set_seed(*opts.seed);
        s.config_echo["seed"] = *opts.seed;
    }
    if (opts.threads) s.cfg.cert.threads = *opts.threads;
    if (opts.out) s.cfg.output_dir = *opts.out;
    std::filesystem::create_directories(s.cfg.output_dir);
    return s;
}

std::string out_path(const Session& s, const std::string& name) {
    return (std::filesystem::path(s.cfg.output_dir) / name).string();
}

void write_summary(const Session& s, const std::string& name, OrderedJson body) {
    body["config"] = s.config_echo;
    reachcert::detail::write_text_file(out_path(s, name), body.dump(2) + "\n");
}

OrderedJson table_stats(const reachcert::ValueTable& table) {
    OrderedJson steps = OrderedJson::array();
    for (int k = 0; k <= table.horizon; ++k) {
        double mn = 1.0, mx = 0.0, sum = 0.0;
        for (double v : table.values[k]) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
            sum += v;
        }
        steps.push_back({{"k", k},
                         {"min", mn},
                         {"mean", sum / static_cast<double>(table.values[k].size())},
                         {"max", mx}});
    }
    return steps;
}

double mean_safe_k0(const reachcert::ValueTable& table, const reachcert::Partition& part) {
    double acc = 0.0;
    int n = 0;
    for (const auto& cell : part.cells) {
        if (cell.label != reachcert::CellLabel::Safe) continue;
        acc += table.values[0][cell.id];
        ++n;
    }
    return n ? acc / n : 0.0;
}

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---- train ----

int cmd_train(const CommonOpts& opts) {
    const Session s = open_session(opts);
    const auto& cfg = s.cfg;
    Stopwatch watch;

    reachcert::Rng data_rng(reachcert::derive_seed(cfg.seed, 0x64617461));
    const auto dataset = reachcert::generate_dataset(
        cfg.environment, cfg.region, cfg.control_bounds, cfg.cloning.data_behavior,
        cfg.cloning.episodes, cfg.cloning.steps, cfg.cloning.exploration_noise, data_rng);
    reachcert::save_dataset(dataset, out_path(s, "dataset.csv"));

    std::vector<double> elbo_trace;
    const auto posterior = reachcert::fit_vi(dataset, cfg.model_arch, cfg.vi, &elbo_trace);
    reachcert::save_posterior(posterior, out_path(s, "posterior.json"));

    // behaviour cloning of the scripted controller at the visited states
    std::vector<std::vector<double>> inputs, targets;
    inputs.reserve(dataset.records.size());
    for (const auto& rec : dataset.records) {
        inputs.push_back(rec.x);
        targets.push_back(reachcert::clamp_to_box(
            reachcert::scripted_action(cfg.environment, cfg.region, rec.x), cfg.control_bounds));
    }
    double clone_mse = 0.0;
    const auto policy = reachcert::fit_regression(inputs, targets, cfg.policy_arch,
                                                  cfg.cloning.regression, &clone_mse);
    reachcert::save_network(policy, out_path(s, "policy.json"));

    write_summary(s, "train_summary.json",
                  {{"records", dataset.records.size()},
                   {"elbo_trace", elbo_trace},
                   {"cloning_mse", clone_mse},
                   {"predictive_rmse", reachcert::predictive_rmse(posterior, dataset)}});
    std::cerr << "train: " << dataset.records.size() << " records, wall " << watch.seconds()
              << " s\n";
    return 0;
}

// ---- certify ----

int cmd_certify(const CommonOpts& opts, const std::string& posterior_path,
                const std::string& policy_path) {
    const Session s = open_session(opts);
    const auto& cfg = s.cfg;
    Stopwatch watch;

    const auto posterior = reachcert::load_posterior(posterior_path);
    const auto policy = reachcert::load_network(policy_path);
    const auto part = cfg.build_grid();

    const auto table = reachcert::certify(posterior, policy, part, cfg.horizon, cfg.cert);
    reachcert::save_value_table(table, part, out_path(s, "value_table.csv"));
    if (part.discretized_dims.size() == 2)
        reachcert::save_heatmap_svg(part, table.values[0], cfg.region,
                                    "certified reach-avoid lower bound, k=0",
                                    out_path(s, "heatmap.svg"));

    write_summary(s, "certify_summary.json",
                  {{"horizon", cfg.horizon},
                   {"cells", part.n_cells()},
                   {"mean_safe_k0", mean_safe_k0(table, part)},
                   {"per_step", table_stats(table)}});
    std::cerr << "certify: " << part.n_cells() << " cells, N=" << cfg.horizon << ", wall "
              << watch.seconds() << " s\n";
    return 0;
}

// ---- synthesize ----

int cmd_synthesize(const CommonOpts& opts, const std::string& posterior_path,
                   const std::string& policy_path) {
    const Session s = open_session(opts);
    const auto& cfg = s.cfg;
    Stopwatch watch;

    const auto posterior = reachcert::load_posterior(posterior_path);
    auto policy = reachcert::load_network(policy_path);
    const auto part = cfg.build_grid();

    const auto baseline_table = reachcert::certify(posterior, policy, part, cfg.horizon, cfg.cert);
    const double baseline_mean = mean_safe_k0(baseline_table, part);

    std::vector<double> improve_trace;
    if (cfg.improve_steps > 0) {
        policy = reachcert::improve_policy(posterior, policy, part, cfg.horizon, cfg.cert,
                                           cfg.improve_steps, cfg.improve_step_size,
                                           &improve_trace);
        reachcert::save_network(policy, out_path(s, "policy_improved.json"));
    }

    const auto [strategy, table] = reachcert::synthesize_grid(posterior, policy, part,
                                                              cfg.horizon, cfg.action_grid,
                                                              cfg.cert);
    reachcert::save_strategy(strategy, part, out_path(s, "strategy.csv"));
    reachcert::save_value_table(table, part, out_path(s, "synth_value_table.csv"));
    if (part.discretized_dims.size() == 2)
        reachcert::save_heatmap_svg(part, table.values[0], cfg.region,
                                    "synthesized certified lower bound, k=0",
                                    out_path(s, "synth_heatmap.svg"));

    OrderedJson body{{"horizon", cfg.horizon},
                     {"baseline_mean_k0", baseline_mean},
                     {"synthesized_mean_k0", mean_safe_k0(table, part)},
                     {"per_step", table_stats(table)}};
    if (!improve_trace.empty()) body["improve_trace"] = improve_trace;
    write_summary(s, "synthesize_summary.json", std::move(body));
    std::cerr << "synthesize: wall " << watch.seconds() << " s\n";
    return 0;
}

// ---- simulate ----

int cmd_simulate(const CommonOpts& opts, const std::string& posterior_path,
                 const std::string& policy_path, const std::string& strategy_path) {
    const Session s = open_session(opts);
    const auto& cfg = s.cfg;
    if (cfg.mc_start.empty())
        throw reachcert::ConfigError("simulate requires mc.start in the config");

    const auto posterior = reachcert::load_posterior(posterior_path);
    const auto policy = reachcert::load_network(policy_path);
    const auto part = cfg.build_grid();

    reachcert::StrategyFn strat = reachcert::policy_strategy(policy);
    reachcert::SynthesizedStrategy synth;
    if (!strategy_path.empty()) {
        synth = reachcert::load_strategy(strategy_path, policy, part, cfg.horizon);
        strat = reachcert::synthesized_strategy(synth, part);
    }

    std::ostringstream dump;
    dump << "traj,k";
    for (int d = 0; d < cfg.environment.state_dim(); ++d) dump << ",x" << d;
    dump << ",outcome\n";
    long hits = 0;
    for (long t = 0; t < cfg.n_traj; ++t) {
        reachcert::Rng rng(reachcert::derive_seed(cfg.seed, 0x73696d, t));
        const auto traj = reachcert::rollout(posterior, strat, cfg.region, cfg.discretized_dims,
                                             cfg.mc_start, cfg.horizon, rng);
        if (traj.outcome == reachcert::Outcome::ReachedGoal) ++hits;
        const char* name = traj.outcome == reachcert::Outcome::ReachedGoal ? "goal"
                           : traj.outcome == reachcert::Outcome::LeftSafe  ? "left_safe"
                                                                           : "expired";
        for (std::size_t k = 0; k < traj.states.size(); ++k) {
            dump << t << "," << k;
            for (double v : traj.states[k]) dump << "," << reachcert::detail::format_double(v);
            dump << "," << (k + 1 == traj.states.size() ? name : "-") << "\n";
        }
    }
    reachcert::detail::write_text_file(out_path(s, "trajectories.csv"), dump.str());

    const auto ci = reachcert::clopper_pearson(hits, cfg.n_traj);
    write_summary(s, "simulate_summary.json",
                  {{"start", cfg.mc_start},
                   {"n_traj", cfg.n_traj},
                   {"successes", hits},
                   {"p_hat", ci.p_hat},
                   {"ci_lo", ci.lo},
                   {"ci_hi", ci.hi}});
    return 0;
}

// ---- compare ----

int cmd_compare(const CommonOpts& opts, const std::string& posterior_path,
                const std::string& policy_path, const std::string& strategy_path) {
    const Session s = open_session(opts);
    const auto& cfg = s.cfg;
    Stopwatch watch;

    const auto posterior = reachcert::load_posterior(posterior_path);
    const auto policy = reachcert::load_network(policy_path);
    const auto part = cfg.build_grid();

    reachcert::ValueTable table;
    reachcert::StrategyFn strat = reachcert::policy_strategy(policy);
    reachcert::SynthesizedStrategy synth;
    if (strategy_path.empty()) {
        table = reachcert::certify(posterior, policy, part, cfg.horizon, cfg.cert);
    } else {
        synth = reachcert::load_strategy(strategy_path, policy, part, cfg.horizon);
        table = reachcert::certify_strategy(posterior, synth, part, cfg.horizon, cfg.cert);
        strat = reachcert::synthesized_strategy(synth, part);
    }

    std::ostringstream out;
    out << "cell_id";
    for (auto d : part.discretized_dims) out << ",center" << d;
    out << ",label,cert_k0,p_hat,ci_lo,ci_hi,violation\n";
    int violations = 0;
    double mean_cert = 0.0, mean_phat = 0.0;
    for (const auto& cell : part.cells) {
        reachcert::Rng rng(reachcert::derive_seed(cfg.seed, 0x636d70, cell.id));
        const auto est =
            reachcert::estimate_reach(posterior, strat, cfg.region, cfg.discretized_dims,
                                      cell.box.center(), cfg.horizon, cfg.n_traj, rng);
        const double cert = table.values[0][cell.id];
        const bool violation = cert > est.ci_hi + 1e-12;
        violations += violation ? 1 : 0;
        mean_cert += cert;
        mean_phat += est.p_hat;
        out << cell.id;
        for (auto d : part.discretized_dims)
            out << "," << reachcert::detail::format_double(cell.box[d].mid());
        out << "," << reachcert::label_name(cell.label) << ","
            << reachcert::detail::format_double(cert) << ","
            << reachcert::detail::format_double(est.p_hat) << ","
            << reachcert::detail::format_double(est.ci_lo) << ","
            << reachcert::detail::format_double(est.ci_hi) << "," << (violation ? 1 : 0) << "\n";
    }
    reachcert::detail::write_text_file(out_path(s, "comparison.csv"), out.str());
    write_summary(s, "compare_summary.json",
                  {{"cells", part.n_cells()},
                   {"n_traj_per_cell", cfg.n_traj},
                   {"mean_cert_k0", mean_cert / part.n_cells()},
                   {"mean_p_hat", mean_phat / part.n_cells()},
                   {"violations", violations}});
    std::cerr << "compare: " << part.n_cells() << " cells, wall " << watch.seconds() << " s\n";
    if (violations > 0) {
        std::cerr << "compare: " << violations
                  << " cell(s) where the certified bound exceeds the Monte-Carlo upper "
                     "confidence limit\n";
        return kExitSoundness;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified reach-avoid bounds for learned stochastic dynamics"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string posterior_path, policy_path, strategy_path;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_path, "experiment config (JSON)")->required();
        cmd->add_option("--seed", opts.seed, "override the config seed");
        cmd->add_option("--threads", opts.threads, "worker thread cap");
        cmd->add_option("--out", opts.out, "override the output directory");
    };
    auto add_models = [&](CLI::App* cmd, bool with_strategy) {
        cmd->add_option("--posterior", posterior_path, "posterior file")->required();
        cmd->add_option("--policy", policy_path, "policy network file")->required();
        if (with_strategy)
            cmd->add_option("--strategy", strategy_path, "synthesized strategy file");
    };

    auto* train = app.add_subcommand("train", "fit the dynamics posterior and clone a policy");
    add_common(train);
    auto* certify = app.add_subcommand("certify", "compute the certified lower-bound table");
    add_common(certify);
    add_models(certify, false);
    auto* synthesize =
        app.add_subcommand("synthesize", "maximize the certified bound over an action grid");
    add_common(synthesize);
    add_models(synthesize, false);
    auto* simulate = app.add_subcommand("simulate", "roll out the learned closed-loop system");
    add_common(simulate);
    add_models(simulate, true);
    auto* compare =
        app.add_subcommand("compare", "certified bound vs Monte-Carlo estimate per cell");
    add_common(compare);
    add_models(compare, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (train->parsed()) return cmd_train(opts);
        if (certify->parsed()) return cmd_certify(opts, posterior_path, policy_path);
        if (synthesize->parsed()) return cmd_synthesize(opts, posterior_path, policy_path);
        if (simulate->parsed())
            return cmd_simulate(opts, posterior_path, policy_path, strategy_path);
        if (compare->parsed())
            return cmd_compare(opts, posterior_path, policy_path, strategy_path);
    } catch (const reachcert::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const reachcert::TrainingError& e) {
        std::cerr << "training failure: " << e.what() << "\n";
        return kExitTraining;
    } catch (const reachcert::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
