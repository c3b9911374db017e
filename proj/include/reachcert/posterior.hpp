// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_POSTERIOR_HPP
#define REACHCERT_POSTERIOR_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "reachcert/interval.hpp"
#include "reachcert/mlp.hpp"
#include "reachcert/optim.hpp"
#include "reachcert/rng.hpp"
#include "reachcert/scalar.hpp"

namespace reachcert {

// Diagonal-Gaussian approximate posterior over the network weights.
// likelihood_sigma doubles as the process-noise scale of the dynamical
// system driven by this model.
struct DiagGaussianPosterior {
    MlpArchitecture arch;
    WeightVector mean;
    WeightVector stddev;
    double likelihood_sigma = 0.1;

    void validate() const {
        arch.validate();
        const std::size_t n = arch.param_count();
        if (mean.size() != n || stddev.size() != n)
            throw std::invalid_argument("posterior: mean/stddev length != parameter count");
        for (double s : stddev)
            if (!(s > 0.0)) throw std::invalid_argument("posterior: stddev must be positive");
        if (!(likelihood_sigma > 0.0))
            throw std::invalid_argument("posterior: likelihood_sigma must be positive");
    }
};

// A near-point posterior around a hand-specified network; handy for tests
// and for treating known dynamics as a degenerate model.
inline DiagGaussianPosterior point_posterior(const Network& net, double stddev,
                                             double likelihood_sigma) {
    DiagGaussianPosterior p;
    p.arch = net.arch;
    p.mean = net.weights;
    p.stddev.assign(net.weights.size(), stddev);
    p.likelihood_sigma = likelihood_sigma;
    p.validate();
    return p;
}

inline WeightVector sample_weights(const DiagGaussianPosterior& post, Rng& rng) {
    WeightVector w(post.mean.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = rng.normal(post.mean[j], post.stddev[j]);
    return w;
}

// Posterior mass of a full-dimensional box: product of per-coordinate
// Gaussian interval masses (erf form).
inline double box_mass(const DiagGaussianPosterior& post, const Box& box) {
    if (box.dim() != post.mean.size())
        throw std::invalid_argument("box_mass: box dimension != parameter count");
    double m = 1.0;
    for (std::size_t j = 0; j < box.dim(); ++j) {
        m *= normal_interval_mass(box[j].lo, box[j].hi, post.mean[j], post.stddev[j]);
        if (m == 0.0) break;
    }
    return m;
}

// Mass of a box over a declared coordinate subset; the remaining coordinates
// marginalize to 1.
inline double box_mass(const DiagGaussianPosterior& post, const Box& box,
                       const std::vector<std::size_t>& coords) {
    if (box.dim() != coords.size())
        throw std::invalid_argument("box_mass: box dimension != subset size");
    double m = 1.0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const std::size_t j = coords[i];
        if (j >= post.mean.size()) throw std::invalid_argument("box_mass: coordinate out of range");
        m *= normal_interval_mass(box[i].lo, box[i].hi, post.mean[j], post.stddev[j]);
        if (m == 0.0) break;
    }
    return m;
}

struct DynamicsRecord {
    std::vector<double> x;
    std::vector<double> u;
    std::vector<double> x_next;
};

struct DynamicsDataset {
    std::vector<DynamicsRecord> records;

    int state_dim() const { return records.empty() ? 0 : static_cast<int>(records[0].x.size()); }
    int control_dim() const { return records.empty() ? 0 : static_cast<int>(records[0].u.size()); }

    void validate() const {
        if (records.empty()) throw std::invalid_argument("dataset: empty");
        const std::size_t n = records[0].x.size(), c = records[0].u.size();
        for (const auto& r : records)
            if (r.x.size() != n || r.u.size() != c || r.x_next.size() != n)
                throw std::invalid_argument("dataset: inconsistent record dimensions");
    }
};

struct ViConfig {
    int epochs = 2000;
    double lr = 0.02;
    int mc_samples = 1;
    double prior_stddev = 1.0;
    double likelihood_sigma = 0.1;
    std::uint64_t seed = 0;
};

struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double softplus(double x) {
    return x > 30.0 ? x : std::log1p(std::exp(x));
}
inline double softplus_derivative(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}
inline double softplus_inverse(double y) {
    return y > 30.0 ? y : std::log(std::expm1(y));
}

// Variational parameters: means followed by rhos, stddev = softplus(rho).
struct ViState {
    MlpArchitecture arch;
    std::vector<double> params; // 2 * n_w

    std::size_t n_w() const { return params.size() / 2; }
    double mean_of(std::size_t j) const { return params[j]; }
    double stddev_of(std::size_t j) const { return softplus(params[n_w() + j]); }
};

// ELBO estimate with the noise draws held fixed (common random numbers):
// a deterministic, differentiable function of the variational parameters.
// eps holds mc_samples rows of n_w standard normals.
inline double elbo_with_eps(const ViState& st, const DynamicsDataset& data,
                            const std::vector<std::vector<double>>& eps, double prior_stddev,
                            double likelihood_sigma, std::vector<double>* grad_out) {
    const std::size_t nw = st.n_w();
    const double inv_var = 1.0 / (likelihood_sigma * likelihood_sigma);
    const double log_norm =
        -std::log(likelihood_sigma) - 0.5 * std::log(2.0 * 3.14159265358979323846);

    if (grad_out) grad_out->assign(st.params.size(), 0.0);
    double elbo = 0.0;

    // expected log-likelihood, MC over weight draws
    const double mc_scale = 1.0 / static_cast<double>(eps.size());
    for (const auto& e : eps) {
        WeightVector w(nw);
        for (std::size_t j = 0; j < nw; ++j) w[j] = st.mean_of(j) + st.stddev_of(j) * e[j];

        std::vector<double> dlogp_dw(nw, 0.0);
        double loglik = 0.0;
        for (const auto& rec : data.records) {
            std::vector<double> in;
            in.reserve(rec.x.size() + rec.u.size());
            in.insert(in.end(), rec.x.begin(), rec.x.end());
            in.insert(in.end(), rec.u.begin(), rec.u.end());
            const std::vector<double> y = forward(st.arch, w, in);
            std::vector<double> upstream(y.size());
            for (std::size_t d = 0; d < y.size(); ++d) {
                const double r = rec.x_next[d] - y[d];
                loglik += log_norm - 0.5 * r * r * inv_var;
                upstream[d] = r * inv_var; // d loglik / d y
            }
            if (grad_out) {
                const Gradient g = gradient(st.arch, w, in, upstream);
                for (std::size_t j = 0; j < nw; ++j) dlogp_dw[j] += g.d_weights[j];
            }
        }
        elbo += mc_scale * loglik;
        if (grad_out) {
            for (std::size_t j = 0; j < nw; ++j) {
                (*grad_out)[j] += mc_scale * dlogp_dw[j];
                (*grad_out)[nw + j] += mc_scale * dlogp_dw[j] * e[j] *
                                       softplus_derivative(st.params[nw + j]);
            }
        }
    }

    // KL(q || N(0, prior_stddev^2 I)), closed form for diagonal Gaussians
    const double pv = prior_stddev * prior_stddev;
    for (std::size_t j = 0; j < nw; ++j) {
        const double m = st.mean_of(j), s = st.stddev_of(j);
        elbo -= std::log(prior_stddev / s) + (s * s + m * m) / (2.0 * pv) - 0.5;
        if (grad_out) {
            (*grad_out)[j] -= m / pv;
            const double dkl_ds = -1.0 / s + s / pv;
            (*grad_out)[nw + j] -= dkl_ds * softplus_derivative(st.params[nw + j]);
        }
    }
    return elbo;
}

} // namespace detail

// Reparametrized stochastic-gradient VI with a diagonal-Gaussian family.
// The returned posterior's ELBO (evaluated with a fixed draw set) is no
// worse than at initialization. `elbo_trace`, when given, receives the
// fixed-draw ELBO at init and at every evaluation checkpoint.
inline DiagGaussianPosterior fit_vi(const DynamicsDataset& data, const MlpArchitecture& arch,
                                    const ViConfig& cfg,
                                    std::vector<double>* elbo_trace = nullptr) {
    data.validate();
    arch.validate();
    if (arch.input_dim() != data.state_dim() + data.control_dim())
        throw std::invalid_argument("fit_vi: architecture input width != state+control dims");
    if (arch.output_dim() != data.state_dim())
        throw std::invalid_argument("fit_vi: architecture output width != state dim");
    if (cfg.epochs < 0 || cfg.mc_samples < 1 || !(cfg.lr > 0.0) || !(cfg.prior_stddev > 0.0) ||
        !(cfg.likelihood_sigma > 0.0))
        throw std::invalid_argument("fit_vi: invalid hyperparameters");

    const std::size_t nw = arch.param_count();
    detail::ViState st;
    st.arch = arch;
    st.params.assign(2 * nw, 0.0);

    Rng rng(derive_seed(cfg.seed, 0x7669)); // init + training noise
    const double init_scale = 0.3;
    for (std::size_t j = 0; j < nw; ++j) st.params[j] = init_scale * rng.normal();
    const double rho0 = detail::softplus_inverse(0.1);
    for (std::size_t j = 0; j < nw; ++j) st.params[nw + j] = rho0;

    // fixed evaluation draws make the best-so-far comparison deterministic
    Rng eval_rng(derive_seed(cfg.seed, 0x6576));
    std::vector<std::vector<double>> eval_eps(4, std::vector<double>(nw));
    for (auto& row : eval_eps)
        for (double& v : row) v = eval_rng.normal();

    auto eval_elbo = [&](const detail::ViState& s) {
        return detail::elbo_with_eps(s, data, eval_eps, cfg.prior_stddev, cfg.likelihood_sigma,
                                     nullptr);
    };

    double best_elbo = eval_elbo(st);
    std::vector<double> best_params = st.params;
    if (elbo_trace) elbo_trace->push_back(best_elbo);

    Adam opt(st.params.size(), cfg.lr);
    std::vector<double> grad;
    std::vector<std::vector<double>> eps(cfg.mc_samples, std::vector<double>(nw));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (auto& row : eps)
            for (double& v : row) v = rng.normal();
        const double elbo = detail::elbo_with_eps(st, data, eps, cfg.prior_stddev,
                                                  cfg.likelihood_sigma, &grad);
        if (!std::isfinite(elbo)) throw TrainingError("fit_vi: ELBO diverged");
        opt.step(st.params, grad);

        if ((epoch + 1) % 25 == 0 || epoch + 1 == cfg.epochs) {
            const double e = eval_elbo(st);
            if (elbo_trace) elbo_trace->push_back(e);
            if (std::isfinite(e) && e > best_elbo) {
                best_elbo = e;
                best_params = st.params;
            }
        }
    }
    st.params = best_params;

    DiagGaussianPosterior post;
    post.arch = arch;
    post.mean.resize(nw);
    post.stddev.resize(nw);
    for (std::size_t j = 0; j < nw; ++j) {
        post.mean[j] = st.mean_of(j);
        post.stddev[j] = st.stddev_of(j);
    }
    post.likelihood_sigma = cfg.likelihood_sigma;
    post.validate();
    return post;
}

// Predictive RMSE of the posterior mean network on a dataset; surfaced in
// training reports.
inline double predictive_rmse(const DiagGaussianPosterior& post, const DynamicsDataset& data) {
    double se = 0.0;
    std::size_t count = 0;
    for (const auto& rec : data.records) {
        std::vector<double> in;
        in.reserve(rec.x.size() + rec.u.size());
        in.insert(in.end(), rec.x.begin(), rec.x.end());
        in.insert(in.end(), rec.u.begin(), rec.u.end());
        const std::vector<double> y = forward(post.arch, post.mean, in);
        for (std::size_t d = 0; d < y.size(); ++d) {
            const double r = y[d] - rec.x_next[d];
            se += r * r;
            ++count;
        }
    }
    return std::sqrt(se / static_cast<double>(count));
}

} // namespace reachcert

#endif
