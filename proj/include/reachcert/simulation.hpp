// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_SIMULATION_HPP
#define REACHCERT_SIMULATION_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reachcert/abstraction.hpp"
#include "reachcert/posterior.hpp"
#include "reachcert/rng.hpp"
#include "reachcert/stats.hpp"
#include "reachcert/synthesis.hpp"

namespace reachcert {

enum class EnvKind { Chain1d, Puck2d, KinematicCar, Hovercraft };

// Ground-truth dynamics used for data collection and as the reference the
// learned model is meant to capture. Continuous-time systems are integrated
// with one explicit Euler step of size h per transition.
struct Environment {
    EnvKind kind = EnvKind::Chain1d;
    double h = 0.1;            // discretization step
    double eta_friction = 0.5; // puck friction
    double mass = 1.0;         // puck mass
    double gravity = 0.1;      // hovercraft altitude loss per step

    int state_dim() const {
        switch (kind) {
            case EnvKind::Chain1d: return 1;
            case EnvKind::Puck2d: return 4;
            case EnvKind::KinematicCar: return 3;
            case EnvKind::Hovercraft: return 4;
        }
        return 0;
    }
    int control_dim() const {
        switch (kind) {
            case EnvKind::Chain1d: return 1;
            case EnvKind::Puck2d: return 2;
            case EnvKind::KinematicCar: return 2;
            case EnvKind::Hovercraft: return 3;
        }
        return 0;
    }
};

inline EnvKind env_kind_from_name(const std::string& name) {
    if (name == "chain1d") return EnvKind::Chain1d;
    if (name == "puck2d") return EnvKind::Puck2d;
    if (name == "kinematic_car") return EnvKind::KinematicCar;
    if (name == "hovercraft") return EnvKind::Hovercraft;
    throw std::invalid_argument("unknown environment: " + name);
}

inline std::string env_name(EnvKind k) {
    switch (k) {
        case EnvKind::Chain1d: return "chain1d";
        case EnvKind::Puck2d: return "puck2d";
        case EnvKind::KinematicCar: return "kinematic_car";
        case EnvKind::Hovercraft: return "hovercraft";
    }
    return "?";
}

inline std::vector<double> env_step(const Environment& env, const std::vector<double>& x,
                                    const std::vector<double>& u) {
    if (static_cast<int>(x.size()) != env.state_dim() ||
        static_cast<int>(u.size()) != env.control_dim())
        throw std::invalid_argument("env_step: dimension mismatch");
    switch (env.kind) {
        case EnvKind::Chain1d:
            return {x[0] + u[0]};
        case EnvKind::Puck2d: {
            // q' = A q + B c with the discrete-time matrices
            const double d = 1.0 - env.h * env.eta_friction / env.mass;
            const double g = env.h / env.mass;
            return {x[0] + env.h * x[2], x[1] + env.h * x[3], d * x[2] + g * u[0],
                    d * x[3] + g * u[1]};
        }
        case EnvKind::KinematicCar: {
            // planar rear-wheel kinematics, Euler step
            const double th = x[2];
            return {x[0] + env.h * std::cos(th) * u[0], x[1] + env.h * std::sin(th) * u[0],
                    x[2] + env.h * u[1]};
        }
        case EnvKind::Hovercraft: {
            // car kinematics plus altitude channel with a gravity loss
            const double th = x[3];
            return {x[0] + env.h * std::cos(th) * u[0], x[1] + env.h * std::sin(th) * u[0],
                    x[2] + env.h * u[1] - env.gravity, x[3] + env.h * u[2]};
        }
    }
    return x;
}

// One step of the learned stochastic system: fresh weights from the
// posterior each step, plus the additive Gaussian process noise.
inline std::vector<double> bnn_step(const DiagGaussianPosterior& post,
                                    const std::vector<double>& x, const std::vector<double>& u,
                                    Rng& rng) {
    std::vector<double> in;
    in.reserve(x.size() + u.size());
    in.insert(in.end(), x.begin(), x.end());
    in.insert(in.end(), u.begin(), u.end());
    const WeightVector w = sample_weights(post, rng);
    std::vector<double> next = forward(post.arch, w, in);
    for (double& v : next) v += rng.normal(0.0, post.likelihood_sigma);
    return next;
}

enum class Outcome { ReachedGoal, LeftSafe, Expired };

struct Trajectory {
    std::vector<std::vector<double>> states; // truncated at goal entry / safe exit
    Outcome outcome = Outcome::Expired;
    int outcome_step = -1;
};

// strategy interface: x, k -> control
using StrategyFn = std::function<std::vector<double>(const std::vector<double>&, int)>;

inline StrategyFn policy_strategy(const Network& policy) {
    return [policy](const std::vector<double>& x, int) { return forward(policy, x); };
}

inline StrategyFn synthesized_strategy(const SynthesizedStrategy& strat, const Partition& part) {
    return [&strat, &part](const std::vector<double>& x, int k) {
        return strat.action_at(part, x, k);
    };
}

// Roll one closed-loop trajectory of the learned system and classify it
// against the reach-avoid specification.
inline Trajectory rollout(const DiagGaussianPosterior& post, const StrategyFn& strategy,
                          const RegionSpec& region, const std::vector<std::size_t>& disc_dims,
                          const std::vector<double>& x0, int horizon, Rng& rng) {
    Trajectory traj;
    std::vector<double> x = x0;
    traj.states.push_back(x);
    for (int k = 0;; ++k) {
        if (in_goal(region, x)) {
            traj.outcome = Outcome::ReachedGoal;
            traj.outcome_step = k;
            return traj;
        }
        if (!in_safe(region, x, disc_dims)) {
            traj.outcome = Outcome::LeftSafe;
            traj.outcome_step = k;
            return traj;
        }
        if (k == horizon) {
            traj.outcome = Outcome::Expired;
            traj.outcome_step = k;
            return traj;
        }
        x = bnn_step(post, x, strategy(x, k), rng);
        traj.states.push_back(x);
    }
}

struct ReachEstimate {
    double p_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 1.0;
    long successes = 0;
    long trials = 0;
};

// Monte-Carlo estimate of the reach-avoid probability with an exact
// Clopper-Pearson 95% interval.
inline ReachEstimate estimate_reach(const DiagGaussianPosterior& post, const StrategyFn& strategy,
                                    const RegionSpec& region,
                                    const std::vector<std::size_t>& disc_dims,
                                    const std::vector<double>& x0, int horizon, long n_traj,
                                    Rng& rng) {
    if (n_traj < 1) throw std::invalid_argument("estimate_reach: n_traj must be >= 1");
    long hits = 0;
    for (long t = 0; t < n_traj; ++t) {
        const Trajectory traj = rollout(post, strategy, region, disc_dims, x0, horizon, rng);
        if (traj.outcome == Outcome::ReachedGoal) ++hits;
    }
    const BinomialInterval ci = clopper_pearson(hits, n_traj);
    return {ci.p_hat, ci.lo, ci.hi, hits, n_traj};
}

enum class Behavior { Random, ScriptedProportional };

// Hand-written proportional controller per environment; the data-collection
// stand-in for a trained exploration policy, and the cloning target for the
// neural baseline.
inline std::vector<double> scripted_action(const Environment& env, const RegionSpec& region,
                                           const std::vector<double>& x) {
    const std::vector<double> goal_c = region.goal.center();
    switch (env.kind) {
        case EnvKind::Chain1d:
            return {0.7 * (goal_c[0] - x[0])};
        case EnvKind::Puck2d:
            return {2.0 * (goal_c[0] - x[0]) - 1.2 * x[2], 2.0 * (goal_c[1] - x[1]) - 1.2 * x[3]};
        case EnvKind::KinematicCar: {
            const double dx = goal_c[0] - x[0], dy = goal_c[1] - x[1];
            const double desired = std::atan2(dy, dx);
            double dth = desired - x[2];
            while (dth > 3.14159265358979323846) dth -= 2.0 * 3.14159265358979323846;
            while (dth < -3.14159265358979323846) dth += 2.0 * 3.14159265358979323846;
            return {0.8 * std::sqrt(dx * dx + dy * dy), 1.5 * dth};
        }
        case EnvKind::Hovercraft: {
            const double dx = goal_c[0] - x[0], dy = goal_c[1] - x[1];
            const double desired = std::atan2(dy, dx);
            double dth = desired - x[3];
            while (dth > 3.14159265358979323846) dth -= 2.0 * 3.14159265358979323846;
            while (dth < -3.14159265358979323846) dth += 2.0 * 3.14159265358979323846;
            const double dz = goal_c[2] - x[2];
            return {0.8 * std::sqrt(dx * dx + dy * dy), 1.5 * dz + env.gravity / env.h, 1.5 * dth};
        }
    }
    return {};
}

inline std::vector<double> clamp_to_box(std::vector<double> u, const Box& bounds) {
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::clamp(u[i], bounds[i].lo, bounds[i].hi);
    return u;
}

// Roll the true environment under the chosen behaviour with exploration
// noise; records are exact env_step transitions.
inline DynamicsDataset generate_dataset(const Environment& env, const RegionSpec& region,
                                        const Box& control_bounds, Behavior behavior,
                                        int episodes, int steps, double exploration_noise,
                                        Rng& rng) {
    if (episodes < 1 || steps < 1)
        throw std::invalid_argument("generate_dataset: positive counts required");
    DynamicsDataset data;
    data.records.reserve(static_cast<std::size_t>(episodes) * steps);
    const int n = env.state_dim(), c = env.control_dim();
    for (int ep = 0; ep < episodes; ++ep) {
        std::vector<double> x(n);
        for (int d = 0; d < n; ++d) x[d] = rng.uniform(region.bounds[d].lo, region.bounds[d].hi);
        for (int s = 0; s < steps; ++s) {
            std::vector<double> u(c);
            if (behavior == Behavior::Random) {
                for (int d = 0; d < c; ++d)
                    u[d] = rng.uniform(control_bounds[d].lo, control_bounds[d].hi);
            } else {
                u = scripted_action(env, region, x);
                for (int d = 0; d < c; ++d) u[d] += exploration_noise * rng.normal();
                u = clamp_to_box(std::move(u), control_bounds);
            }
            std::vector<double> next = env_step(env, x, u);
            data.records.push_back({x, u, next});
            x = std::move(next);
        }
    }
    return data;
}

} // namespace reachcert

#endif
