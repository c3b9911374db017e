// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_PROPAGATION_HPP
#define REACHCERT_PROPAGATION_HPP

#include <stdexcept>
#include <vector>

#include "reachcert/interval.hpp"
#include "reachcert/mlp.hpp"

namespace reachcert {

inline Interval apply_activation(Activation a, const Interval& z) {
    // relu and tanh are monotone, so endpoint maps are exact
    return Interval(apply_activation(a, z.lo), apply_activation(a, z.hi));
}

namespace detail {

// Layerwise interval propagation through the network, with per-layer weight
// and bias enclosures sliced from a flat weight box.
inline Box ibp_layers(const MlpArchitecture& arch, const Box& weight_box, Box h) {
    for (std::size_t l = 0; l + 1 < arch.layer_sizes.size(); ++l) {
        const int nin = arch.layer_sizes[l], nout = arch.layer_sizes[l + 1];
        const std::size_t off = arch.layer_offset(l);
        IntervalMatrix wm(nout, nin);
        for (int o = 0; o < nout; ++o)
            for (int i = 0; i < nin; ++i)
                wm.at(o, i) = weight_box[off + static_cast<std::size_t>(o) * nin + i];
        std::vector<Interval> bias(nout);
        for (int o = 0; o < nout; ++o)
            bias[o] = weight_box[off + static_cast<std::size_t>(nout) * nin + o];
        Box z = interval_affine(wm, Box(std::move(bias)), h);
        if (arch.layer_has_activation(l)) {
            const Activation a = arch.hidden_activations[l];
            for (auto& zi : z.dims) zi = apply_activation(a, zi);
        }
        h = std::move(z);
    }
    return h;
}

} // namespace detail

// Bounding box of the policy output over a state box (point weights).
inline Box ibp_policy(const MlpArchitecture& arch, const WeightVector& w, const Box& x_box) {
    check_weight_length(arch, w);
    if (static_cast<int>(x_box.dim()) != arch.input_dim())
        throw std::invalid_argument("ibp_policy: input dimension mismatch");
    return detail::ibp_layers(arch, Box::point(w), x_box);
}

inline Box ibp_policy(const Network& net, const Box& x_box) {
    return ibp_policy(net.arch, net.weights, x_box);
}

// Joint enclosure of f^w(x, u) for all w in weight_box, x in x_box,
// u in u_box. u_box may be absent for nets without a control input.
inline Box ibp_bnn(const MlpArchitecture& arch, const Box& weight_box, const Box& x_box,
                   const Box* u_box = nullptr) {
    if (weight_box.dim() != arch.param_count())
        throw std::invalid_argument("ibp_bnn: weight box dimension mismatch");
    const std::size_t ud = u_box ? u_box->dim() : 0;
    if (x_box.dim() + ud != static_cast<std::size_t>(arch.input_dim()))
        throw std::invalid_argument("ibp_bnn: input box dimensions mismatch");
    std::vector<Interval> in;
    in.reserve(x_box.dim() + ud);
    in.insert(in.end(), x_box.dims.begin(), x_box.dims.end());
    if (u_box) in.insert(in.end(), u_box->dims.begin(), u_box->dims.end());
    return detail::ibp_layers(arch, weight_box, Box(std::move(in)));
}

inline Box ibp_bnn(const MlpArchitecture& arch, const Box& weight_box, const Box& x_box,
                   const Box& u_box) {
    return ibp_bnn(arch, weight_box, x_box, &u_box);
}

// Minkowski sum with the noise cube [-eps, eps]^n.
inline Box inflate(const Box& box, double eps) {
    if (!(eps >= 0.0)) throw std::invalid_argument("inflate: eps must be nonnegative");
    Box out = box;
    for (auto& d : out.dims) d = Interval(d.lo - eps, d.hi + eps);
    return out;
}

} // namespace reachcert

#endif
