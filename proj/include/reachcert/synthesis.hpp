// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_SYNTHESIS_HPP
#define REACHCERT_SYNTHESIS_HPP

#include <optional>
#include <utility>
#include <vector>

#include "reachcert/certifier.hpp"

namespace reachcert {

// Finite candidate set of control vectors inside the compact admissible set.
// The baseline policy always participates as an implicit extra candidate,
// evaluated over the whole cell like in certification.
struct ActionGrid {
    std::vector<std::vector<double>> candidates;

    void validate(int control_dim) const {
        for (const auto& u : candidates)
            if (static_cast<int>(u.size()) != control_dim)
                throw std::invalid_argument("ActionGrid: candidate dimension mismatch");
    }
};

// Max-cert strategy: per (k, cell) either a constant control vector or
// "follow the baseline policy" (nullopt). Outside queries and unhandled
// cells fall back to the baseline network.
struct SynthesizedStrategy {
    int horizon = 0;
    int control_dim = 0;
    std::vector<std::vector<std::optional<std::vector<double>>>> actions; // [k][cell]
    Network baseline;

    std::vector<double> action_at(const Partition& part, const std::vector<double>& x,
                                  int k) const {
        if (k >= 0 && k < horizon) {
            const auto cell = locate(part, x);
            if (cell && actions[k][*cell]) return *actions[k][*cell];
        }
        return forward(baseline, x);
    }
};

// Backward max-cert recursion: identical to certification except that per
// (k, cell) every candidate action is evaluated (constant-action enclosure
// replacing the policy box) and the argmax is kept. The baseline candidate
// reproduces the certification evaluation sample-for-sample, so the
// returned table dominates certify's pointwise under shared seeds, with
// equality when the grid is empty.
inline std::pair<SynthesizedStrategy, ValueTable> synthesize_grid(
    const DiagGaussianPosterior& post, const Network& baseline, const Partition& part, int N,
    const ActionGrid& grid, const CertConfig& cfg) {
    cfg.validate();
    post.validate();
    baseline.arch.validate();
    const int control_dim = baseline.arch.output_dim();
    grid.validate(control_dim);
    if (baseline.arch.input_dim() != post.arch.output_dim())
        throw std::invalid_argument("synthesize_grid: policy input dim != state dim");
    if (control_dim + baseline.arch.input_dim() != post.arch.input_dim())
        throw std::invalid_argument("synthesize_grid: state+control dims != model input dim");

    const int state_dim = post.arch.output_dim();
    const double eps = epsilon_from_eta(post.likelihood_sigma, cfg.eta);
    const double eta_pow = std::pow(cfg.eta, state_dim);
    const std::size_t n_q = part.n_cells();

    std::vector<Box> policy_boxes(n_q, Box::point({0.0}));
    for (std::size_t i = 0; i < n_q; ++i)
        if (part.cells[i].label == CellLabel::Safe)
            policy_boxes[i] = ibp_policy(baseline, part.cells[i].box);

    SynthesizedStrategy strat;
    strat.horizon = N;
    strat.control_dim = control_dim;
    strat.baseline = baseline;
    strat.actions.assign(N, std::vector<std::optional<std::vector<double>>>(n_q));

    ValueTable table;
    table.horizon = N;
    table.n_cells = n_q;
    table.values.assign(N + 1, std::vector<double>(n_q, 0.0));
    table.used_threshold.assign(N + 1, std::vector<double>(n_q, 0.0));
    if (cfg.mode == ThresholdMode::Ladder) table.thresholds = cfg.thresholds;
    if (cfg.mode == ThresholdMode::Dyadic) {
        table.thresholds.resize(cfg.dyadic_levels + 1);
        for (int i = 0; i <= cfg.dyadic_levels; ++i)
            table.thresholds[i] = static_cast<double>(i) / cfg.dyadic_levels;
    }
    for (int k = 0; k <= N; ++k)
        for (std::size_t i = 0; i < n_q; ++i)
            if (part.cells[i].label == CellLabel::Goal) table.values[k][i] = 1.0;

    for (int k = N - 1; k >= 0; --k) {
        const std::vector<double>& k_next = table.values[k + 1];
        std::vector<double>& row = table.values[k];
        std::vector<double>& used = table.used_threshold[k];
        parallel_for(n_q, cfg.threads, [&](std::size_t i) {
            const AbstractState& q = part.cells[i];
            if (q.label != CellLabel::Safe) return;
            const double nb_max = detail::neighborhood_max(part, k_next, q, cfg.rho_x);
            if (nb_max <= 0.0) {
                row[i] = 0.0;
                return;
            }
            const std::uint64_t stream =
                derive_seed(cfg.seed, static_cast<std::uint64_t>(k), q.id);

            // baseline first; candidates replace it only on strict improvement
            double best_used = 0.0;
            double best = detail::evaluate_cell(post, q, &policy_boxes[i], k_next, part, eps,
                                                eta_pow, cfg, stream, nb_max, &best_used);
            std::optional<std::vector<double>> best_action; // nullopt = baseline

            for (const auto& u : grid.candidates) {
                const Box u_point = Box::point(u);
                double cand_used = 0.0;
                const double val = detail::evaluate_cell(post, q, &u_point, k_next, part, eps,
                                                         eta_pow, cfg, stream, nb_max,
                                                         &cand_used);
                if (val > best) {
                    best = val;
                    best_used = cand_used;
                    best_action = u;
                }
            }
            row[i] = best;
            used[i] = best_used;
            strat.actions[k][i] = best_action;
        });
    }
    return {std::move(strat), std::move(table)};
}

// Backward certification of a fixed (k, cell) -> action table: the same
// pass as certify with the per-cell control enclosure taken from the
// strategy (stored actions as zero-width boxes, baseline cells through the
// policy box). Used to evaluate exported strategies.
inline ValueTable certify_strategy(const DiagGaussianPosterior& post,
                                   const SynthesizedStrategy& strat, const Partition& part,
                                   int N, const CertConfig& cfg) {
    std::vector<Box> policy_boxes(part.n_cells(), Box::point({0.0}));
    for (std::size_t i = 0; i < part.n_cells(); ++i)
        if (part.cells[i].label == CellLabel::Safe)
            policy_boxes[i] = ibp_policy(strat.baseline, part.cells[i].box);
    return detail::backward_pass(post, part, N, cfg, [&](int k, const AbstractState& q) {
        if (k < strat.horizon && strat.actions[k][q.id]) return Box::point(*strat.actions[k][q.id]);
        return policy_boxes[q.id];
    });
}

// Mean certified bound at k = 0 over Safe cells: the synthesis objective.
inline double certified_objective(const ValueTable& table, const Partition& part) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < part.n_cells(); ++i) {
        if (part.cells[i].label != CellLabel::Safe) continue;
        acc += table.values[0][i];
        ++count;
    }
    return count == 0 ? 0.0 : acc / static_cast<double>(count);
}

// Derivative-free fine-tuning of the policy weights against the certified
// objective: mirrored random perturbations, accept only strict improvement.
// The certification seed is held fixed, so the objective is deterministic
// and the accepted sequence is non-decreasing by construction. When given,
// `trace` receives the objective at the start and after every accepted step.
inline Network improve_policy(const DiagGaussianPosterior& post, const Network& policy,
                              const Partition& part, int N, const CertConfig& cfg, int steps,
                              double step_size, std::vector<double>* trace = nullptr) {
    if (steps < 0) throw std::invalid_argument("improve_policy: steps must be >= 0");
    if (!(step_size > 0.0)) throw std::invalid_argument("improve_policy: step_size must be > 0");

    Network current = policy;
    double current_obj = certified_objective(certify(post, current, part, N, cfg), part);
    if (trace) trace->push_back(current_obj);

    Rng rng(derive_seed(cfg.seed, 0x696d7072));
    const std::size_t n_w = current.weights.size();
    std::vector<double> direction(n_w);

    for (int s = 0; s < steps; ++s) {
        for (auto& d : direction) d = rng.normal();
        for (const double sign : {1.0, -1.0}) {
            Network trial = current;
            for (std::size_t j = 0; j < n_w; ++j)
                trial.weights[j] += sign * step_size * direction[j];
            const double obj = certified_objective(certify(post, trial, part, N, cfg), part);
            if (obj > current_obj) {
                current = std::move(trial);
                current_obj = obj;
                if (trace) trace->push_back(current_obj);
                break;
            }
        }
    }
    return current;
}

} // namespace reachcert

#endif
