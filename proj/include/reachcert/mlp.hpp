// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_MLP_HPP
#define REACHCERT_MLP_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace reachcert {

enum class Activation { Relu, Tanh };

inline double apply_activation(Activation a, double z) {
    switch (a) {
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Tanh: return std::tanh(z);
    }
    return z;
}

inline double activation_derivative(Activation a, double z) {
    switch (a) {
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
    }
    return 1.0;
}

// Feed-forward architecture: layer_sizes = {input, hidden..., output}, one
// monotone activation per hidden layer, identity on the output layer.
//
// Canonical weight flattening, fixed so weight-space boxes align bit-exactly
// with parameters across save/load: for each layer l (in -> out), the out*in
// weight matrix row-major (output-major), then the out biases.
struct MlpArchitecture {
    std::vector<int> layer_sizes;
    std::vector<Activation> hidden_activations;

    MlpArchitecture() = default;
    MlpArchitecture(std::vector<int> sizes, std::vector<Activation> acts)
        : layer_sizes(std::move(sizes)), hidden_activations(std::move(acts)) {
        validate();
    }
    static MlpArchitecture uniform(std::vector<int> sizes, Activation act) {
        std::vector<Activation> acts(sizes.size() >= 2 ? sizes.size() - 2 : 0, act);
        return MlpArchitecture(std::move(sizes), std::move(acts));
    }

    void validate() const {
        if (layer_sizes.size() < 2)
            throw std::invalid_argument("MlpArchitecture: need at least input and output layer");
        for (int s : layer_sizes)
            if (s <= 0) throw std::invalid_argument("MlpArchitecture: nonpositive layer size");
        if (hidden_activations.size() != layer_sizes.size() - 2)
            throw std::invalid_argument("MlpArchitecture: one activation per hidden layer");
    }

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    std::size_t num_layers() const { return layer_sizes.size() - 1; }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
            n += static_cast<std::size_t>(layer_sizes[l + 1]) * layer_sizes[l] + layer_sizes[l + 1];
        return n;
    }

    // offset of layer l's weight block in the flat vector
    std::size_t layer_offset(std::size_t l) const {
        std::size_t off = 0;
        for (std::size_t i = 0; i < l; ++i)
            off += static_cast<std::size_t>(layer_sizes[i + 1]) * layer_sizes[i] + layer_sizes[i + 1];
        return off;
    }

    // output layer is identity
    bool layer_has_activation(std::size_t layer) const {
        return layer < hidden_activations.size();
    }
};

// All weights and biases in the canonical order above.
using WeightVector = std::vector<double>;

struct Network {
    MlpArchitecture arch;
    WeightVector weights;
};

inline void check_weight_length(const MlpArchitecture& arch, const WeightVector& w) {
    if (w.size() != arch.param_count())
        throw std::invalid_argument("weight vector length does not match architecture");
}

inline std::vector<double> forward(const MlpArchitecture& arch, const WeightVector& w,
                                   const std::vector<double>& x) {
    check_weight_length(arch, w);
    if (static_cast<int>(x.size()) != arch.input_dim())
        throw std::invalid_argument("forward: input dimension mismatch");

    std::vector<double> h = x;
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < arch.layer_sizes.size(); ++l) {
        const int nin = arch.layer_sizes[l], nout = arch.layer_sizes[l + 1];
        std::vector<double> z(nout);
        for (int o = 0; o < nout; ++o) {
            double acc = w[off + static_cast<std::size_t>(nout) * nin + o]; // bias
            const std::size_t row = off + static_cast<std::size_t>(o) * nin;
            for (int i = 0; i < nin; ++i) acc += w[row + i] * h[i];
            z[o] = acc;
        }
        if (arch.layer_has_activation(l)) {
            const Activation a = arch.hidden_activations[l];
            for (double& v : z) v = apply_activation(a, v);
        }
        h = std::move(z);
        off += static_cast<std::size_t>(nout) * nin + nout;
    }
    return h;
}

inline std::vector<double> forward(const Network& net, const std::vector<double>& x) {
    return forward(net.arch, net.weights, x);
}

struct Gradient {
    WeightVector d_weights;
    std::vector<double> d_input;
};

// Reverse-mode gradients of <upstream, forward(arch, w, x)> with respect to
// the weights and the input.
inline Gradient gradient(const MlpArchitecture& arch, const WeightVector& w,
                         const std::vector<double>& x, const std::vector<double>& upstream) {
    check_weight_length(arch, w);
    if (static_cast<int>(x.size()) != arch.input_dim())
        throw std::invalid_argument("gradient: input dimension mismatch");
    if (static_cast<int>(upstream.size()) != arch.output_dim())
        throw std::invalid_argument("gradient: upstream dimension mismatch");

    const std::size_t n_layers = arch.num_layers();
    std::vector<std::vector<double>> inputs(n_layers);  // activation entering each layer
    std::vector<std::vector<double>> preact(n_layers);  // affine output before activation

    std::vector<double> h = x;
    std::size_t off = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        inputs[l] = h;
        const int nin = arch.layer_sizes[l], nout = arch.layer_sizes[l + 1];
        std::vector<double> z(nout);
        for (int o = 0; o < nout; ++o) {
            double acc = w[off + static_cast<std::size_t>(nout) * nin + o];
            const std::size_t row = off + static_cast<std::size_t>(o) * nin;
            for (int i = 0; i < nin; ++i) acc += w[row + i] * h[i];
            z[o] = acc;
        }
        preact[l] = z;
        if (arch.layer_has_activation(l)) {
            const Activation a = arch.hidden_activations[l];
            for (double& v : z) v = apply_activation(a, v);
        }
        h = std::move(z);
        off += static_cast<std::size_t>(nout) * nin + nout;
    }

    Gradient g;
    g.d_weights.assign(w.size(), 0.0);
    std::vector<double> delta = upstream;

    for (std::size_t l = n_layers; l-- > 0;) {
        const int nin = arch.layer_sizes[l], nout = arch.layer_sizes[l + 1];
        const std::size_t loff = arch.layer_offset(l);
        if (arch.layer_has_activation(l)) {
            const Activation a = arch.hidden_activations[l];
            for (int o = 0; o < nout; ++o) delta[o] *= activation_derivative(a, preact[l][o]);
        }
        for (int o = 0; o < nout; ++o) {
            const std::size_t row = loff + static_cast<std::size_t>(o) * nin;
            for (int i = 0; i < nin; ++i) g.d_weights[row + i] += delta[o] * inputs[l][i];
            g.d_weights[loff + static_cast<std::size_t>(nout) * nin + o] += delta[o];
        }
        std::vector<double> prev(nin, 0.0);
        for (int i = 0; i < nin; ++i) {
            double acc = 0.0;
            for (int o = 0; o < nout; ++o)
                acc += delta[o] * w[loff + static_cast<std::size_t>(o) * nin + i];
            prev[i] = acc;
        }
        delta = std::move(prev);
    }
    g.d_input = std::move(delta);
    return g;
}

} // namespace reachcert

#endif
