// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_ABSTRACTION_HPP
#define REACHCERT_ABSTRACTION_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "reachcert/interval.hpp"

namespace reachcert {

// Half-plane a . y <= b over the discretized coordinates.
struct HalfPlane {
    std::vector<double> a;
    double b = 0.0;
};

// Convex obstacle: intersection of half-planes.
using ConvexPolytope = std::vector<HalfPlane>;

// Geometry of the specification. The safe set is bounds minus goal minus
// obstacles; goal and safe are disjoint by construction.
struct RegionSpec {
    Box bounds;                           // analysis domain, full state dims
    Box goal;                             // goal region, full state dims
    std::vector<ConvexPolytope> obstacles; // over the discretized coordinates

    void validate() const {
        if (goal.dim() != bounds.dim())
            throw std::invalid_argument("RegionSpec: goal/bounds dimension mismatch");
        if (!bounds.contains(goal))
            throw std::invalid_argument("RegionSpec: goal must lie within bounds");
    }
};

inline bool point_in_polytope(const ConvexPolytope& poly, const std::vector<double>& y) {
    for (const auto& hp : poly) {
        double dot = 0.0;
        for (std::size_t i = 0; i < hp.a.size(); ++i) dot += hp.a[i] * y[i];
        if (dot > hp.b) return false;
    }
    return true;
}

enum class CellLabel { Goal, Safe, Unsafe };

struct AbstractState {
    int id = -1;
    Box box;          // full state dims; undiscretized dims carry the global bound
    CellLabel label = CellLabel::Unsafe;
};

// Uniform grid over the projection of bounds onto the discretized dims.
// Cells are half-open [lo, hi) per dim, with the last cell closed, so the
// locator z is single-valued.
struct Partition {
    Box bounds;
    std::vector<std::size_t> discretized_dims;
    std::vector<int> cells_per_dim;
    std::vector<AbstractState> cells;

    std::size_t state_dim() const { return bounds.dim(); }
    std::size_t n_cells() const { return cells.size(); }

    double cell_width(std::size_t k) const {
        const auto d = discretized_dims[k];
        return (bounds[d].hi - bounds[d].lo) / cells_per_dim[k];
    }

    // per-dim cell index of a coordinate value, or nullopt if outside bounds
    std::optional<int> dim_index(std::size_t k, double v) const {
        const auto d = discretized_dims[k];
        if (v < bounds[d].lo || v > bounds[d].hi) return std::nullopt;
        const double w = cell_width(k);
        int i = static_cast<int>(std::floor((v - bounds[d].lo) / w));
        if (i >= cells_per_dim[k]) i = cells_per_dim[k] - 1; // top edge joins last cell
        if (i < 0) i = 0;
        return i;
    }

    int linear_index(const std::vector<int>& idx) const {
        int lin = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) lin = lin * cells_per_dim[k] + idx[k];
        return lin;
    }
};

namespace detail {

// min of a . y over a box (per-coordinate endpoint choice)
inline double min_dot_over_box(const std::vector<double>& a, const Box& box) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += a[i] >= 0.0 ? a[i] * box[i].lo : a[i] * box[i].hi;
    return acc;
}

// Sufficient separation test: true if some defining half-plane of the
// polytope excludes the whole box. False positives on intersection are
// possible near vertices and only make labels more conservative.
inline bool box_may_intersect_polytope(const Box& box, const ConvexPolytope& poly) {
    for (const auto& hp : poly)
        if (min_dot_over_box(hp.a, box) > hp.b) return false;
    return true;
}

} // namespace detail

inline Partition build_partition(const RegionSpec& spec, const std::vector<int>& cells_per_dim,
                                 const std::vector<std::size_t>& discretized_dims) {
    spec.validate();
    if (discretized_dims.empty() || discretized_dims.size() != cells_per_dim.size())
        throw std::invalid_argument("build_partition: dims/cells size mismatch");
    for (int m : cells_per_dim)
        if (m < 1) throw std::invalid_argument("build_partition: cells_per_dim must be >= 1");
    for (auto d : discretized_dims) {
        if (d >= spec.bounds.dim())
            throw std::invalid_argument("build_partition: discretized dim out of range");
        if (!(spec.bounds[d].width() > 0.0))
            throw std::invalid_argument("build_partition: degenerate bounds on discretized dim");
    }
    for (const auto& poly : spec.obstacles)
        for (const auto& hp : poly)
            if (hp.a.size() != discretized_dims.size())
                throw std::invalid_argument("build_partition: half-plane dimension mismatch");

    Partition part;
    part.bounds = spec.bounds;
    part.discretized_dims = discretized_dims;
    part.cells_per_dim = cells_per_dim;

    const std::size_t nd = discretized_dims.size();
    std::size_t total = 1;
    for (int m : cells_per_dim) total *= static_cast<std::size_t>(m);
    part.cells.reserve(total);

    std::vector<int> idx(nd, 0);
    for (std::size_t lin = 0; lin < total; ++lin) {
        Box cell = spec.bounds; // undiscretized dims keep the global interval
        Box proj(std::vector<Interval>(nd, Interval(0, 1)));
        for (std::size_t k = 0; k < nd; ++k) {
            const auto d = discretized_dims[k];
            const double w = (spec.bounds[d].hi - spec.bounds[d].lo) / cells_per_dim[k];
            const double lo = spec.bounds[d].lo + idx[k] * w;
            const double hi = (idx[k] + 1 == cells_per_dim[k]) ? spec.bounds[d].hi : lo + w;
            cell[d] = Interval(lo, hi);
            proj[k] = Interval(lo, hi);
        }

        AbstractState st;
        st.id = static_cast<int>(lin);
        st.box = cell;
        if (spec.goal.contains(cell)) {
            st.label = CellLabel::Goal;
        } else {
            // Safe requires: no positive-measure goal overlap and obstacle
            // separation. Mixed cells are conservatively Unsafe. Shared
            // faces and ulp-scale slivers from accumulated cell edges are
            // null sets and do not disqualify a cell.
            bool goal_free = false;
            for (std::size_t d = 0; d < cell.dim(); ++d) {
                const double tol = 1e-9 * spec.bounds[d].width();
                if (spec.goal[d].hi <= cell[d].lo + tol) goal_free = true;
                if (spec.goal[d].lo >= cell[d].hi - tol) goal_free = true;
            }
            bool obstacle_free = true;
            for (const auto& poly : spec.obstacles)
                if (detail::box_may_intersect_polytope(proj, poly)) obstacle_free = false;
            st.label = (goal_free && obstacle_free) ? CellLabel::Safe : CellLabel::Unsafe;
        }
        part.cells.push_back(std::move(st));

        for (std::size_t k = nd; k-- > 0;) {
            if (++idx[k] < cells_per_dim[k]) break;
            idx[k] = 0;
        }
    }
    return part;
}

// z: state -> cell id, nullopt when the projection leaves the bounds.
inline std::optional<int> locate(const Partition& part, const std::vector<double>& x) {
    if (x.size() != part.state_dim())
        throw std::invalid_argument("locate: state dimension mismatch");
    std::vector<int> idx(part.discretized_dims.size());
    for (std::size_t k = 0; k < part.discretized_dims.size(); ++k) {
        const auto i = part.dim_index(k, x[part.discretized_dims[k]]);
        if (!i) return std::nullopt;
        idx[k] = *i;
    }
    return part.linear_index(idx);
}

struct CellQuery {
    std::vector<int> ids;
    bool outside = false; // query box escapes the bounds on a discretized dim
};

// Cells whose boxes share positive measure with a query box given over the
// discretized dims. A dimension of zero width falls back to the locator's
// half-open convention, so locate(x) is always among the cells returned for
// the point box at x.
inline CellQuery cells_intersecting(const Partition& part, const Box& query) {
    if (query.dim() != part.discretized_dims.size())
        throw std::invalid_argument("cells_intersecting: query over discretized dims expected");
    CellQuery out;
    const std::size_t nd = part.discretized_dims.size();
    std::vector<int> lo_idx(nd), hi_idx(nd);
    for (std::size_t k = 0; k < nd; ++k) {
        const auto d = part.discretized_dims[k];
        if (query[k].lo < part.bounds[d].lo || query[k].hi > part.bounds[d].hi) out.outside = true;
        const double w = part.cell_width(k);
        const int m = part.cells_per_dim[k];
        int ilo, ihi;
        if (query[k].lo == query[k].hi) {
            const auto i = part.dim_index(k, query[k].lo);
            if (!i) return out;
            ilo = ihi = *i;
        } else {
            ilo = static_cast<int>(std::floor((query[k].lo - part.bounds[d].lo) / w));
            ihi = static_cast<int>(std::floor((query[k].hi - part.bounds[d].lo) / w));
            // a query face exactly on a cell boundary does not reach into
            // the upper cell
            if (part.bounds[d].lo + ihi * w == query[k].hi) --ihi;
            if (ihi < 0 || ilo >= m) return out; // no overlap on this dim
            ilo = std::max(0, ilo);
            ihi = std::min(ihi, m - 1);
        }
        lo_idx[k] = ilo;
        hi_idx[k] = ihi;
    }
    std::vector<int> idx = lo_idx;
    while (true) {
        out.ids.push_back(part.linear_index(idx));
        std::size_t k = nd;
        bool carried = true;
        while (k-- > 0) {
            if (++idx[k] <= hi_idx[k]) {
                carried = false;
                break;
            }
            idx[k] = lo_idx[k];
        }
        if (carried) break;
    }
    return out;
}

// Point membership tests for trajectory classification.
inline bool in_goal(const RegionSpec& spec, const std::vector<double>& x) {
    return spec.goal.contains(x);
}

inline bool in_safe(const RegionSpec& spec, const std::vector<double>& x,
                    const std::vector<std::size_t>& discretized_dims) {
    if (!spec.bounds.contains(x)) return false;
    if (in_goal(spec, x)) return false;
    if (!spec.obstacles.empty()) {
        std::vector<double> proj(discretized_dims.size());
        for (std::size_t k = 0; k < discretized_dims.size(); ++k) proj[k] = x[discretized_dims[k]];
        for (const auto& poly : spec.obstacles)
            if (point_in_polytope(poly, proj)) return false;
    }
    return true;
}

} // namespace reachcert

#endif
