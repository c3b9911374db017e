// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_CERTIFIER_HPP
#define REACHCERT_CERTIFIER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "reachcert/abstraction.hpp"
#include "reachcert/interval.hpp"
#include "reachcert/parallel.hpp"
#include "reachcert/posterior.hpp"
#include "reachcert/propagation.hpp"
#include "reachcert/rng.hpp"
#include "reachcert/scalar.hpp"

namespace reachcert {

// Noise radius matching per-coordinate confidence eta:
// P(|v| <= eps) = eta for v ~ N(0, sigma^2).
inline double epsilon_from_eta(double sigma, double eta) {
    if (!(sigma > 0.0)) throw std::domain_error("epsilon_from_eta: sigma must be positive");
    if (!(eta > 0.0 && eta < 1.0)) throw std::domain_error("epsilon_from_eta: eta must be in (0,1)");
    return std::sqrt(2.0 * sigma * sigma) * erf_inv(eta);
}

// Pairwise-disjoint union of axis-aligned boxes in weight space. New boxes
// are split against the existing ones before insertion; any sub-box of an
// accepted box still satisfies the acceptance predicate, which quantifies
// over all of its weights, so splitting never discards certified mass.
class WeightBoxUnion {
  public:
    explicit WeightBoxUnion(std::size_t dim) : dim_(dim) {}

    void insert(const Box& box) {
        if (box.dim() != dim_) throw std::invalid_argument("WeightBoxUnion: dimension mismatch");
        std::vector<Box> fragments{box};
        for (const auto& existing : boxes_) {
            if (fragments.empty()) break;
            std::vector<Box> next;
            for (const auto& f : fragments) {
                auto pieces = subtract_box(f, existing);
                next.insert(next.end(), pieces.begin(), pieces.end());
            }
            fragments = std::move(next);
        }
        for (auto& f : fragments) boxes_.push_back(std::move(f));
    }

    std::size_t dim() const { return dim_; }
    const std::vector<Box>& boxes() const { return boxes_; }

    double total_mass(const DiagGaussianPosterior& post) const {
        double m = 0.0;
        for (const auto& b : boxes_) m += box_mass(post, b);
        return m;
    }
    double total_mass(const DiagGaussianPosterior& post,
                      const std::vector<std::size_t>& coords) const {
        double m = 0.0;
        for (const auto& b : boxes_) m += box_mass(post, b, coords);
        return m;
    }

  private:
    std::size_t dim_;
    std::vector<Box> boxes_;
};

inline void insert_disjoint(WeightBoxUnion& u, const Box& box) { u.insert(box); }

// How the per-cell probability thresholds are chosen.
//  Dyadic:    fixed built-in ladder of dyadic_levels equal steps; each
//             sampled box contributes at the ladder floor of the worst
//             next-step value its enclosure can reach.
//  Heuristic: single threshold v1 = max of K_{k+1} over the rho_x
//             neighbourhood; boxes clearing v1 contribute at weight v1.
//  Ladder:    user-supplied thresholds 0 = v_0 < ... < v_np = 1; boxes
//             contribute at the largest v_{i-1} below the worst reached
//             value.
enum class ThresholdMode { Dyadic, Heuristic, Ladder };

struct CertConfig {
    int n_s = 100;       // weight boxes sampled per (k, cell)
    double rho_w = 0.05; // weight margin
    double rho_x = 0.1;  // state margin for the threshold heuristic / skip test
    double eta = 0.99;   // per-coordinate noise confidence
    ThresholdMode mode = ThresholdMode::Dyadic;
    int dyadic_levels = 1024;
    std::vector<double> thresholds; // Ladder mode: 0 = v_0 < ... < v_np = 1
    std::uint64_t seed = 0;
    std::vector<std::size_t> weight_subset; // empty = certify all weights
    int threads = 1;

    void validate() const {
        if (n_s < 1) throw std::invalid_argument("CertConfig: n_s must be >= 1");
        if (!(rho_w >= 0.0)) throw std::invalid_argument("CertConfig: rho_w must be >= 0");
        if (!(rho_x >= 0.0)) throw std::invalid_argument("CertConfig: rho_x must be >= 0");
        if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("CertConfig: eta in (0,1)");
        if (mode == ThresholdMode::Ladder) {
            if (thresholds.size() < 2 || thresholds.front() != 0.0 || thresholds.back() != 1.0)
                throw std::invalid_argument("CertConfig: ladder must run 0 = v0 < ... < 1");
            for (std::size_t i = 1; i < thresholds.size(); ++i)
                if (!(thresholds[i - 1] < thresholds[i]))
                    throw std::invalid_argument("CertConfig: ladder must be strictly increasing");
        }
        if (mode == ThresholdMode::Dyadic && dyadic_levels < 2)
            throw std::invalid_argument("CertConfig: dyadic_levels must be >= 2");
    }
};

// Certified lower-bound field K_k(q) for k in [0, N].
struct ValueTable {
    int horizon = 0;
    std::size_t n_cells = 0;
    std::vector<std::vector<double>> values;        // [k][cell]
    std::vector<double> thresholds;                 // ladder in effect (empty: heuristic)
    std::vector<std::vector<double>> used_threshold; // [k][cell], top weight actually used

    double at(int k, int cell) const { return values[k][cell]; }
    const std::vector<double>& row(int k) const { return values[k]; }
};

namespace detail {

// worst next-step value reachable from an enclosure, 0 if it can escape
struct EnclosureFloor {
    double min_value = 0.0;
    double max_value = 0.0;
    bool outside = false;
};

inline EnclosureFloor evaluate_enclosure(const Partition& part,
                                         const std::vector<double>& k_next, const Box& x_bar) {
    EnclosureFloor out;
    // undiscretized dims must stay within bounds; beyond them K is 0
    std::vector<bool> is_disc(part.state_dim(), false);
    for (auto d : part.discretized_dims) is_disc[d] = true;
    for (std::size_t d = 0; d < part.state_dim(); ++d) {
        if (is_disc[d]) continue;
        if (x_bar[d].lo < part.bounds[d].lo || x_bar[d].hi > part.bounds[d].hi) {
            out.outside = true;
            return out;
        }
    }
    std::vector<Interval> proj;
    proj.reserve(part.discretized_dims.size());
    for (auto d : part.discretized_dims) proj.push_back(x_bar[d]);
    const CellQuery cq = cells_intersecting(part, Box(std::move(proj)));
    if (cq.outside || cq.ids.empty()) {
        out.outside = true;
        return out;
    }
    double mn = 1.0, mx = 0.0;
    for (int id : cq.ids) {
        mn = std::min(mn, k_next[id]);
        mx = std::max(mx, k_next[id]);
    }
    out.min_value = mn;
    out.max_value = mx;
    return out;
}

// largest ladder weight at or below the reached floor
inline double ladder_floor(const CertConfig& cfg, double m, double heuristic_v1) {
    if (m <= 0.0) return 0.0;
    switch (cfg.mode) {
        case ThresholdMode::Dyadic: {
            const double L = static_cast<double>(cfg.dyadic_levels);
            return std::floor(m * L) / L;
        }
        case ThresholdMode::Heuristic:
            return m >= heuristic_v1 ? heuristic_v1 : 0.0;
        case ThresholdMode::Ladder: {
            double w = 0.0;
            // weights are v_0 .. v_{np-1}, per the v_{i-1} recursion
            for (std::size_t i = 0; i + 1 < cfg.thresholds.size(); ++i)
                if (cfg.thresholds[i] <= m) w = cfg.thresholds[i];
            return w;
        }
    }
    return 0.0;
}

inline double neighborhood_max(const Partition& part, const std::vector<double>& k_next,
                               const AbstractState& q, double rho_x) {
    std::vector<Interval> nb;
    nb.reserve(part.discretized_dims.size());
    for (auto d : part.discretized_dims) {
        const double lo = std::max(q.box[d].lo - rho_x, part.bounds[d].lo);
        const double hi = std::min(q.box[d].hi + rho_x, part.bounds[d].hi);
        nb.emplace_back(lo, hi);
    }
    const CellQuery cq = cells_intersecting(part, Box(std::move(nb)));
    double mx = 0.0;
    for (int id : cq.ids) mx = std::max(mx, k_next[id]);
    return mx;
}

inline double gauss_cdf(double x, double mean, double stddev) {
    return 0.5 * (1.0 + erf((x - mean) / (1.4142135623730950488 * stddev)));
}

// One (k, cell) evaluation in Gaussian-CDF-transformed weight space, where
// the posterior mass of a fragment is its plain volume.
//
// Pass 1 fragments the union by inserting every sampled box in sample
// order, so the fragment geometry is a function of the sample stream alone
// (never of K_{k+1}); refinement closes once the unit cube is covered to
// rounding or a fragment budget is hit, both conditions shared by any run
// with the same stream prefix. Pass 2 credits each fragment at the highest
// floor among all sampled boxes that contain it. The value therefore never
// decreases when K_{k+1} grows pointwise or when the sample stream is
// prefix-extended, which gives the dominance and sample-monotonicity
// guarantees downstream.
inline double evaluate_cell(const DiagGaussianPosterior& post, const AbstractState& q,
                            const Box* u_box, const std::vector<double>& k_next,
                            const Partition& part, double eps, double eta_pow,
                            const CertConfig& cfg, std::uint64_t stream_seed,
                            double heuristic_v1, double* used_threshold_out) {
    Rng rng(stream_seed);
    const std::size_t n_w = post.mean.size();
    const bool subset_mode = !cfg.weight_subset.empty();
    const std::vector<std::size_t>& subset = cfg.weight_subset;
    const std::size_t union_dim = subset_mode ? subset.size() : n_w;

    struct Sample {
        double floor = 0.0;
        Box transformed{std::vector<Interval>{Interval(0, 1)}};
    };
    std::vector<Sample> samples;
    samples.reserve(cfg.n_s);

    for (int s = 0; s < cfg.n_s; ++s) {
        WeightVector w;
        Box weight_box(std::vector<Interval>(n_w, Interval(0, 0)));
        if (subset_mode) {
            // uncertified weights are frozen at the posterior mean
            w = post.mean;
            for (auto j : subset) w[j] = rng.normal(post.mean[j], post.stddev[j]);
            for (std::size_t j = 0; j < n_w; ++j) weight_box[j] = Interval::point(w[j]);
            for (auto j : subset) weight_box[j] = Interval(w[j] - cfg.rho_w, w[j] + cfg.rho_w);
        } else {
            w = sample_weights(post, rng);
            for (std::size_t j = 0; j < n_w; ++j)
                weight_box[j] = Interval(w[j] - cfg.rho_w, w[j] + cfg.rho_w);
        }

        const Box x_bar = inflate(ibp_bnn(post.arch, weight_box, q.box, u_box), eps);
        const EnclosureFloor ef = evaluate_enclosure(part, k_next, x_bar);
        const double floor_w = ef.outside ? 0.0 : ladder_floor(cfg, ef.min_value, heuristic_v1);

        std::vector<Interval> t(union_dim, Interval(0, 1));
        for (std::size_t i = 0; i < union_dim; ++i) {
            const std::size_t j = subset_mode ? subset[i] : i;
            t[i] = Interval(gauss_cdf(weight_box[j].lo, post.mean[j], post.stddev[j]),
                            gauss_cdf(weight_box[j].hi, post.mean[j], post.stddev[j]));
        }
        samples.push_back({floor_w, Box(std::move(t))});
    }

    // pass 1: disjoint fragments, sample order, unconditional. Refinement
    // closes when the cube is covered to within kCoverSlack (everything
    // still uncovered is worth at most that much) or at the fragment
    // budget; both triggers depend only on the sample prefix.
    constexpr double kCoverSlack = 1e-7;
    constexpr std::size_t kFragmentBudget = 8192;
    std::vector<Box> fragments;
    std::vector<double> credits; // creator floor, raised in pass 2
    double covered = 0.0;
    bool closed = false;
    for (const auto& s : samples) {
        if (closed) break;
        std::vector<Box> pieces{s.transformed};
        for (const auto& f : fragments) {
            if (pieces.empty()) break;
            std::vector<Box> next;
            for (const auto& p : pieces) {
                auto sub = subtract_box(p, f);
                next.insert(next.end(), sub.begin(), sub.end());
            }
            pieces = std::move(next);
        }
        for (auto& p : pieces) {
            covered += p.volume();
            fragments.push_back(std::move(p));
            credits.push_back(s.floor);
        }
        if (covered >= 1.0 - kCoverSlack || fragments.size() > kFragmentBudget) closed = true;
    }

    // pass 2: raise each fragment to the best floor among covering boxes
    std::vector<std::size_t> by_floor(samples.size());
    for (std::size_t i = 0; i < by_floor.size(); ++i) by_floor[i] = i;
    std::stable_sort(by_floor.begin(), by_floor.end(), [&](std::size_t a, std::size_t b) {
        return samples[a].floor > samples[b].floor;
    });
    double top_floor = 0.0;
    double value = 0.0;
    for (std::size_t fi = 0; fi < fragments.size(); ++fi) {
        double credit = credits[fi];
        for (std::size_t si : by_floor) {
            if (samples[si].floor <= credit) break; // sorted: nothing better left
            if (samples[si].transformed.contains(fragments[fi])) {
                credit = samples[si].floor;
                break;
            }
        }
        top_floor = std::max(top_floor, credit);
        value += credit * fragments[fi].volume();
    }
    if (used_threshold_out) *used_threshold_out = top_floor;
    return std::clamp(eta_pow * value, 0.0, 1.0);
}

} // namespace detail

// Acceptance predicate of Algorithm 1 for a single sampled weight box: the
// inflated closed-loop enclosure of q must stay inside the analysis bounds
// and land only on cells whose next-step value lies within [v_lo, v_hi].
inline bool accept_box(const AbstractState& q, const Box& hat_h, const Network& policy,
                       const DiagGaussianPosterior& post, const std::vector<double>& k_next,
                       double v_lo, double v_hi, double eps, const Partition& part) {
    if (!(v_lo <= v_hi)) throw std::invalid_argument("accept_box: v_lo > v_hi");
    const Box u_box = ibp_policy(policy, q.box);
    const Box x_bar = inflate(ibp_bnn(post.arch, hat_h, q.box, u_box), eps);
    const auto ef = detail::evaluate_enclosure(part, k_next, x_bar);
    if (ef.outside) return false;
    return ef.min_value >= v_lo && ef.max_value <= v_hi;
}

namespace detail {

// control enclosure per (k, cell); shared by certification and synthesis
using ControlProvider = std::function<Box(int /*k*/, const AbstractState&)>;

inline ValueTable backward_pass(const DiagGaussianPosterior& post, const Partition& part, int N,
                                const CertConfig& cfg, const ControlProvider& control) {
    cfg.validate();
    post.validate();
    if (N < 0) throw std::invalid_argument("certify: negative horizon");

    const int state_dim = post.arch.output_dim();
    if (static_cast<std::size_t>(state_dim) != part.state_dim())
        throw std::invalid_argument("certify: model state dim != partition dim");
    for (auto j : cfg.weight_subset)
        if (j >= post.mean.size())
            throw std::invalid_argument("certify: weight subset index out of range");

    const double eps = epsilon_from_eta(post.likelihood_sigma, cfg.eta);
    const double eta_pow = std::pow(cfg.eta, state_dim);
    const std::size_t n_q = part.n_cells();

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
            if (q.label != CellLabel::Safe) return; // Goal stays 1, Unsafe stays 0
            const double nb_max = neighborhood_max(part, k_next, q, cfg.rho_x);
            if (nb_max <= 0.0) {
                row[i] = 0.0;
                return;
            }
            const Box u_box = control(k, q);
            row[i] = evaluate_cell(post, q, &u_box, k_next, part, eps, eta_pow, cfg,
                                   derive_seed(cfg.seed, static_cast<std::uint64_t>(k), q.id),
                                   nb_max, &used[i]);
        });
    }
    return table;
}

} // namespace detail

// Algorithm-1 style backward computation of the certified lower bound on
// the reach-avoid probability under a neural policy.
inline ValueTable certify(const DiagGaussianPosterior& post, const Network& policy,
                          const Partition& part, int N, const CertConfig& cfg) {
    policy.arch.validate();
    check_weight_length(policy.arch, policy.weights);
    if (policy.arch.input_dim() != post.arch.output_dim())
        throw std::invalid_argument("certify: policy input dim != state dim");
    if (policy.arch.output_dim() + policy.arch.input_dim() != post.arch.input_dim())
        throw std::invalid_argument("certify: state+control dims != model input dim");

    // the policy box depends only on the cell, not on the time step
    std::vector<Box> policy_boxes(part.n_cells(), Box::point({0.0}));
    for (std::size_t i = 0; i < part.n_cells(); ++i)
        if (part.cells[i].label == CellLabel::Safe)
            policy_boxes[i] = ibp_policy(policy, part.cells[i].box);

    return detail::backward_pass(post, part, N, cfg,
                                 [&](int, const AbstractState& q) { return policy_boxes[q.id]; });
}

// ---------------------------------------------------------------------------
// Analytic oracle for 1D systems: dense quadrature of the exact value
// recursion. Used as the upper reference in tests; shares nothing with the
// sampled-box certification path above.

struct Kernel1D {
    std::function<double(double)> mean_map; // x -> E[x'] under the closed loop
    double sigma = 0.0;                     // 0 => deterministic transition
};

namespace detail {

inline double interp_value(const std::vector<double>& grid, const std::vector<double>& v,
                           double x) {
    if (x <= grid.front() || x >= grid.back()) return 0.0; // outside S ∪ G
    const double step = grid[1] - grid[0];
    const auto i = static_cast<std::size_t>((x - grid.front()) / step);
    const std::size_t j = std::min(i, grid.size() - 2);
    const double t = (x - grid[j]) / step;
    return v[j] * (1.0 - t) + v[j + 1] * t;
}

// Exact integral of the piecewise-linear interpolant of v against
// N(mu, sigma^2) over the Gaussian's effective support within the grid.
// Uses, per slice, the closed forms of the zeroth and first Gaussian
// moments over an interval.
inline double integrate_interp_gauss(const std::vector<double>& grid,
                                     const std::vector<double>& v, double mu, double sigma) {
    const double lo = grid.front(), hi = grid.back();
    const double a = std::max(lo, mu - 8.0 * sigma);
    const double b = std::min(hi, mu + 8.0 * sigma);
    if (!(b > a)) return 0.0;
    const double h = grid[1] - grid[0];
    const std::size_t n = grid.size();
    auto idx_of = [&](double y) {
        const auto i = static_cast<std::size_t>((y - lo) / h);
        return std::min(i, n - 2);
    };
    auto cdf = [&](double y) {
        return 0.5 * (1.0 + erf((y - mu) / (1.4142135623730950488 * sigma)));
    };
    auto pdf = [&](double y) {
        const double z = (y - mu) / sigma;
        return std::exp(-0.5 * z * z) / (sigma * 2.5066282746310005024);
    };
    double acc = 0.0;
    for (std::size_t i = idx_of(a); i <= idx_of(b) && i + 1 < n; ++i) {
        const double s = std::max(a, grid[i]);
        const double t = std::min(b, grid[i + 1]);
        if (!(t > s)) continue;
        const double slope = (v[i + 1] - v[i]) / h;
        const double c0 = v[i] - slope * grid[i];
        const double mass = cdf(t) - cdf(s);
        acc += c0 * mass + slope * (mu * mass - sigma * sigma * (pdf(t) - pdf(s)));
    }
    return acc;
}

} // namespace detail

// Exact value recursion on a fine grid; returns the per-cell infimum so the
// result upper-bounds any sound per-cell certificate.
inline ValueTable exact_value_oracle(const Kernel1D& kernel, const RegionSpec& region,
                                     const Partition& part, int N, int grid_points = 2001) {
    if (part.state_dim() != 1 || part.discretized_dims != std::vector<std::size_t>{0})
        throw std::invalid_argument("exact_value_oracle: 1D partitions only");
    if (grid_points < 11) throw std::invalid_argument("exact_value_oracle: grid too coarse");

    const double lo = region.bounds[0].lo, hi = region.bounds[0].hi;
    std::vector<double> grid(grid_points);
    const double step = (hi - lo) / (grid_points - 1);
    for (int i = 0; i < grid_points; ++i) grid[i] = lo + i * step;

    auto indicator_row = [&](std::vector<double>& v) {
        for (int i = 0; i < grid_points; ++i)
            v[i] = in_goal(region, {grid[i]}) ? 1.0 : 0.0;
    };

    std::vector<double> v_next(grid_points), v_cur(grid_points);
    indicator_row(v_next);

    std::vector<std::vector<double>> rows(N + 1);
    rows[N] = v_next;

    for (int k = N - 1; k >= 0; --k) {
        for (int i = 0; i < grid_points; ++i) {
            const double x = grid[i];
            if (in_goal(region, {x})) {
                v_cur[i] = 1.0;
                continue;
            }
            if (!in_safe(region, {x}, part.discretized_dims)) {
                v_cur[i] = 0.0;
                continue;
            }
            const double mu = kernel.mean_map(x);
            if (kernel.sigma == 0.0) {
                double val;
                if (in_goal(region, {mu}))
                    val = 1.0;
                else if (!in_safe(region, {mu}, part.discretized_dims))
                    val = 0.0;
                else
                    val = detail::interp_value(grid, v_next, mu);
                v_cur[i] = val;
                continue;
            }
            v_cur[i] =
                std::min(1.0, detail::integrate_interp_gauss(grid, v_next, mu, kernel.sigma));
        }
        rows[k] = v_cur;
        std::swap(v_next, v_cur);
    }

    ValueTable table;
    table.horizon = N;
    table.n_cells = part.n_cells();
    table.values.assign(N + 1, std::vector<double>(part.n_cells(), 0.0));
    for (int k = 0; k <= N; ++k) {
        for (std::size_t c = 0; c < part.n_cells(); ++c) {
            const AbstractState& q = part.cells[c];
            if (q.label == CellLabel::Goal) {
                table.values[k][c] = 1.0;
                continue;
            }
            if (q.label == CellLabel::Unsafe) continue;
            double inf = 1.0;
            for (int i = 0; i < grid_points; ++i) {
                if (grid[i] < q.box[0].lo || grid[i] >= q.box[0].hi) continue;
                inf = std::min(inf, rows[k][i]);
            }
            table.values[k][c] = inf;
        }
    }
    return table;
}

// Deterministic-kernel convenience: zero-noise transition map.
inline ValueTable exact_value_oracle(const std::function<double(double)>& step_map,
                                     const RegionSpec& region, const Partition& part, int N,
                                     int grid_points = 2001) {
    Kernel1D k;
    k.mean_map = step_map;
    k.sigma = 0.0;
    return exact_value_oracle(k, region, part, N, grid_points);
}

} // namespace reachcert

#endif
