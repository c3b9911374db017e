// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_INTERVAL_HPP
#define REACHCERT_INTERVAL_HPP

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace reachcert {

// Closed real interval [lo, hi], the carrier of every sound enclosure.
// Round-to-nearest arithmetic without outward rounding; the certified
// quantities are probabilities compared at 1e-6 granularity, so soundness
// slack is provided by test tolerances instead of directed rounding.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double l, double h) : lo(l), hi(h) {
        if (!(lo <= hi)) throw std::invalid_argument("Interval: lo > hi");
    }
    static Interval point(double x) { return Interval(x, x); }

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
};

inline Interval operator+(const Interval& a, const Interval& b) {
    return {a.lo + b.lo, a.hi + b.hi};
}

inline Interval operator-(const Interval& a, const Interval& b) {
    return {a.lo - b.hi, a.hi - b.lo};
}

// Exact interval product: hull of the four endpoint products.
inline Interval operator*(const Interval& a, const Interval& b) {
    const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    return {std::min(std::min(p1, p2), std::min(p3, p4)),
            std::max(std::max(p1, p2), std::max(p3, p4))};
}

inline Interval intersect(const Interval& a, const Interval& b) {
    return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

// Axis-aligned product of intervals. Houses abstract states, sampled weight
// rectangles and the noise cube.
struct Box {
    std::vector<Interval> dims;

    Box() = default;
    explicit Box(std::vector<Interval> d) : dims(std::move(d)) {
        if (dims.empty()) throw std::invalid_argument("Box: empty dimension list");
    }
    static Box point(const std::vector<double>& x) {
        std::vector<Interval> d;
        d.reserve(x.size());
        for (double v : x) d.push_back(Interval::point(v));
        return Box(std::move(d));
    }
    static Box centered(const std::vector<double>& c, double radius) {
        std::vector<Interval> d;
        d.reserve(c.size());
        for (double v : c) d.emplace_back(v - radius, v + radius);
        return Box(std::move(d));
    }

    std::size_t dim() const { return dims.size(); }
    const Interval& operator[](std::size_t i) const { return dims[i]; }
    Interval& operator[](std::size_t i) { return dims[i]; }

    double volume() const {
        double v = 1.0;
        for (const auto& d : dims) v *= d.width();
        return v;
    }
    bool contains(const std::vector<double>& x) const {
        if (x.size() != dims.size()) return false;
        for (std::size_t i = 0; i < dims.size(); ++i)
            if (!dims[i].contains(x[i])) return false;
        return true;
    }
    bool contains(const Box& o) const {
        for (std::size_t i = 0; i < dims.size(); ++i)
            if (!dims[i].contains(o.dims[i])) return false;
        return true;
    }
    std::vector<double> center() const {
        std::vector<double> c(dims.size());
        for (std::size_t i = 0; i < dims.size(); ++i) c[i] = dims[i].mid();
        return c;
    }
};

// Open-interior overlap: true iff the boxes share positive measure.
inline bool boxes_overlap(const Box& a, const Box& b) {
    for (std::size_t i = 0; i < a.dim(); ++i)
        if (!(a[i].lo < b[i].hi && b[i].lo < a[i].hi)) return false;
    return true;
}

// a minus b as pairwise-disjoint boxes (standard axis sweep). Degenerate
// slivers are dropped; they carry no measure.
inline std::vector<Box> subtract_box(const Box& a, const Box& b) {
    std::vector<Box> out;
    if (!boxes_overlap(a, b)) {
        out.push_back(a);
        return out;
    }
    Box rest = a;
    for (std::size_t d = 0; d < a.dim(); ++d) {
        if (rest[d].lo < b[d].lo) {
            Box below = rest;
            below[d] = Interval(rest[d].lo, b[d].lo);
            if (below.volume() > 0.0) out.push_back(below);
            rest[d] = Interval(b[d].lo, rest[d].hi);
        }
        if (rest[d].hi > b[d].hi) {
            Box above = rest;
            above[d] = Interval(b[d].hi, rest[d].hi);
            if (above.volume() > 0.0) out.push_back(above);
            rest[d] = Interval(rest[d].lo, b[d].hi);
        }
    }
    return out; // whatever is left of `rest` lies inside b
}

// Interval-valued matrix, row-major.
struct IntervalMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<Interval> a;

    IntervalMatrix() = default;
    IntervalMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}
    const Interval& at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    Interval& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
};

// Sound enclosure of { Wx + b : W in W_box, b in b_box, x in x_box }.
// Each output coordinate is the interval sum of exact per-entry products.
inline Box interval_affine(const IntervalMatrix& w_box, const Box& b_box, const Box& x_box) {
    if (w_box.cols != x_box.dim() || w_box.rows != b_box.dim())
        throw std::invalid_argument("interval_affine: shape mismatch");
    std::vector<Interval> out(w_box.rows);
    for (std::size_t i = 0; i < w_box.rows; ++i) {
        double lo = b_box[i].lo, hi = b_box[i].hi;
        for (std::size_t j = 0; j < w_box.cols; ++j) {
            const Interval p = w_box.at(i, j) * x_box[j];
            lo += p.lo;
            hi += p.hi;
        }
        out[i] = Interval(lo, hi);
    }
    return Box(std::move(out));
}

} // namespace reachcert

#endif
