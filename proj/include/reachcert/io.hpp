// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_IO_HPP
#define REACHCERT_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "reachcert/abstraction.hpp"
#include "reachcert/certifier.hpp"
#include "reachcert/posterior.hpp"
#include "reachcert/synthesis.hpp"

namespace reachcert {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using OrderedJson = nlohmann::ordered_json;

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string activation_name(Activation a) {
    return a == Activation::Relu ? "relu" : "tanh";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "tanh") return Activation::Tanh;
    throw IoError("unknown activation: " + s);
}

inline OrderedJson arch_to_json(const MlpArchitecture& arch) {
    OrderedJson j;
    j["layer_sizes"] = arch.layer_sizes;
    std::vector<std::string> acts;
    for (auto a : arch.hidden_activations) acts.push_back(activation_name(a));
    j["activations"] = acts;
    return j;
}

inline MlpArchitecture arch_from_json(const OrderedJson& j) {
    std::vector<int> sizes = j.at("layer_sizes").get<std::vector<int>>();
    std::vector<Activation> acts;
    for (const auto& s : j.at("activations")) acts.push_back(activation_from_name(s));
    return MlpArchitecture(std::move(sizes), std::move(acts));
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace detail

// ---- network (policy) files ----

inline void save_network(const Network& net, const std::string& path) {
    OrderedJson j;
    j["format_version"] = 1;
    j["kind"] = "network";
    j["architecture"] = detail::arch_to_json(net.arch);
    j["weights"] = net.weights;
    detail::write_text_file(path, j.dump(2) + "\n");
}

inline Network load_network(const std::string& path) {
    OrderedJson j;
    try {
        j = OrderedJson::parse(detail::read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("network file parse error: ") + e.what());
    }
    if (j.value("format_version", 0) != 1) throw IoError("unsupported network format_version");
    Network net;
    net.arch = detail::arch_from_json(j.at("architecture"));
    net.weights = j.at("weights").get<WeightVector>();
    check_weight_length(net.arch, net.weights);
    return net;
}

// ---- posterior files ----

inline void save_posterior(const DiagGaussianPosterior& post, const std::string& path) {
    OrderedJson j;
    j["format_version"] = 1;
    j["kind"] = "posterior";
    j["architecture"] = detail::arch_to_json(post.arch);
    j["mean"] = post.mean;
    j["stddev"] = post.stddev;
    j["likelihood_sigma"] = post.likelihood_sigma;
    detail::write_text_file(path, j.dump(2) + "\n");
}

inline DiagGaussianPosterior load_posterior(const std::string& path) {
    OrderedJson j;
    try {
        j = OrderedJson::parse(detail::read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("posterior file parse error: ") + e.what());
    }
    if (j.value("format_version", 0) != 1) throw IoError("unsupported posterior format_version");
    DiagGaussianPosterior post;
    post.arch = detail::arch_from_json(j.at("architecture"));
    post.mean = j.at("mean").get<WeightVector>();
    post.stddev = j.at("stddev").get<WeightVector>();
    post.likelihood_sigma = j.at("likelihood_sigma").get<double>();
    post.validate();
    return post;
}

// ---- dataset files: CSV with a header row declaring dims ----

inline void save_dataset(const DynamicsDataset& data, const std::string& path) {
    data.validate();
    const int n = data.state_dim(), c = data.control_dim();
    std::ostringstream out;
    for (int i = 0; i < n; ++i) out << (i ? "," : "") << "x" << i;
    for (int i = 0; i < c; ++i) out << ",u" << i;
    for (int i = 0; i < n; ++i) out << ",next" << i;
    out << "\n";
    for (const auto& r : data.records) {
        bool first = true;
        auto put = [&](double v) {
            out << (first ? "" : ",") << detail::format_double(v);
            first = false;
        };
        for (double v : r.x) put(v);
        for (double v : r.u) put(v);
        for (double v : r.x_next) put(v);
        out << "\n";
    }
    detail::write_text_file(path, out.str());
}

inline DynamicsDataset load_dataset(const std::string& path) {
    std::istringstream in(detail::read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw IoError("dataset file is empty: " + path);
    int n = 0, c = 0;
    {
        std::istringstream hs(line);
        std::string tok;
        while (std::getline(hs, tok, ',')) {
            if (tok.rfind("x", 0) == 0) ++n;
            else if (tok.rfind("u", 0) == 0) ++c;
            else if (tok.rfind("next", 0) != 0) throw IoError("dataset header token: " + tok);
        }
    }
    if (n <= 0) throw IoError("dataset header declares no state dims");
    DynamicsDataset data;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::vector<double> row;
        while (std::getline(ls, tok, ',')) row.push_back(std::stod(tok));
        if (static_cast<int>(row.size()) != 2 * n + c)
            throw IoError("dataset row width mismatch");
        DynamicsRecord r;
        r.x.assign(row.begin(), row.begin() + n);
        r.u.assign(row.begin() + n, row.begin() + n + c);
        r.x_next.assign(row.begin() + n + c, row.end());
        data.records.push_back(std::move(r));
    }
    data.validate();
    return data;
}

// ---- value table export ----

inline std::string label_name(CellLabel l) {
    switch (l) {
        case CellLabel::Goal: return "goal";
        case CellLabel::Safe: return "safe";
        case CellLabel::Unsafe: return "unsafe";
    }
    return "?";
}

inline void save_value_table(const ValueTable& table, const Partition& part,
                             const std::string& path) {
    std::ostringstream out;
    out << "k,cell_id";
    for (std::size_t k = 0; k < part.discretized_dims.size(); ++k)
        out << ",center" << part.discretized_dims[k];
    out << ",label,value\n";
    for (int k = 0; k <= table.horizon; ++k) {
        for (std::size_t i = 0; i < part.n_cells(); ++i) {
            const auto& cell = part.cells[i];
            out << k << "," << cell.id;
            for (auto d : part.discretized_dims)
                out << "," << detail::format_double(cell.box[d].mid());
            out << "," << label_name(cell.label) << ","
                << detail::format_double(table.values[k][i]) << "\n";
        }
    }
    detail::write_text_file(path, out.str());
}

// ---- synthesized strategy export / import ----

inline void save_strategy(const SynthesizedStrategy& strat, const Partition& part,
                          const std::string& path) {
    std::ostringstream out;
    out << "k,cell_id,source";
    for (int i = 0; i < strat.control_dim; ++i) out << ",u" << i;
    out << "\n";
    for (int k = 0; k < strat.horizon; ++k) {
        for (std::size_t i = 0; i < part.n_cells(); ++i) {
            if (part.cells[i].label != CellLabel::Safe) continue;
            out << k << "," << i;
            if (strat.actions[k][i]) {
                out << ",grid";
                for (double v : *strat.actions[k][i]) out << "," << detail::format_double(v);
            } else {
                out << ",baseline";
                const auto u = forward(strat.baseline, part.cells[i].box.center());
                for (double v : u) out << "," << detail::format_double(v);
            }
            out << "\n";
        }
    }
    detail::write_text_file(path, out.str());
}

// The baseline network travels separately; rows marked "baseline" defer to it.
inline SynthesizedStrategy load_strategy(const std::string& path, const Network& baseline,
                                         const Partition& part, int horizon) {
    std::istringstream in(detail::read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw IoError("strategy file is empty: " + path);
    SynthesizedStrategy strat;
    strat.horizon = horizon;
    strat.control_dim = baseline.arch.output_dim();
    strat.baseline = baseline;
    strat.actions.assign(horizon,
                         std::vector<std::optional<std::vector<double>>>(part.n_cells()));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::vector<std::string> toks;
        while (std::getline(ls, tok, ',')) toks.push_back(tok);
        if (toks.size() != 3 + static_cast<std::size_t>(strat.control_dim))
            throw IoError("strategy row width mismatch");
        const int k = std::stoi(toks[0]);
        const std::size_t cell = std::stoul(toks[1]);
        if (k < 0 || k >= horizon || cell >= part.n_cells())
            throw IoError("strategy row out of range");
        if (toks[2] == "grid") {
            std::vector<double> u(strat.control_dim);
            for (int i = 0; i < strat.control_dim; ++i) u[i] = std::stod(toks[3 + i]);
            strat.actions[k][cell] = std::move(u);
        } else if (toks[2] != "baseline") {
            throw IoError("strategy source must be grid or baseline");
        }
    }
    return strat;
}

} // namespace reachcert

#endif
