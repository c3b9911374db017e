// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "reachcert/abstraction.hpp"
#include "reachcert/rng.hpp"
#include "support/oracles.hpp"

using namespace reachcert;

namespace {

RegionSpec chain_region() {
    RegionSpec spec;
    spec.bounds = Box(std::vector<Interval>{Interval(0, 1)});
    spec.goal = Box(std::vector<Interval>{Interval(0.8, 1.0)});
    return spec;
}

// equilateral-ish triangle as three half-planes around a center
ConvexPolytope triangle(double cx, double cy, double r) {
    ConvexPolytope poly;
    std::vector<std::pair<double, double>> verts;
    for (int i = 0; i < 3; ++i) {
        const double a = 2.0 * 3.14159265358979323846 * i / 3.0 + 0.5;
        verts.emplace_back(cx + r * std::cos(a), cy + r * std::sin(a));
    }
    for (int i = 0; i < 3; ++i) {
        const auto [x1, y1] = verts[i];
        const auto [x2, y2] = verts[(i + 1) % 3];
        // outward normal of the edge (v1, v2); the third vertex lies inside
        double nx = y2 - y1, ny = x1 - x2;
        const auto [x3, y3] = verts[(i + 2) % 3];
        if (nx * x3 + ny * y3 > nx * x1 + ny * y1) {
            nx = -nx;
            ny = -ny;
        }
        poly.push_back({{nx, ny}, nx * x1 + ny * y1});
    }
    return poly;
}

} // namespace

TEST_CASE("1D aligned grid labels") {
    const auto spec = chain_region();
    const auto part = build_partition(spec, {5}, {0});
    REQUIRE(part.n_cells() == 5);
    for (int i = 0; i < 4; ++i) CHECK(part.cells[i].label == CellLabel::Safe);
    CHECK(part.cells[4].label == CellLabel::Goal);
    CHECK(part.cells[4].box[0].lo == doctest::Approx(0.8));
    CHECK(part.cells[4].box[0].hi == doctest::Approx(1.0));
}

TEST_CASE("goal boundary mid-cell labels the cell Unsafe") {
    RegionSpec spec;
    spec.bounds = Box(std::vector<Interval>{Interval(0, 1)});
    spec.goal = Box(std::vector<Interval>{Interval(0.75, 1.0)});
    const auto part = build_partition(spec, {5}, {0}); // cells of width 0.2
    CHECK(part.cells[3].label == CellLabel::Unsafe);   // [0.6, 0.8) straddles 0.75
    CHECK(part.cells[4].label == CellLabel::Goal);
    CHECK(part.cells[0].label == CellLabel::Safe);
}

TEST_CASE("degenerate bounds rejected") {
    RegionSpec spec;
    spec.bounds = Box(std::vector<Interval>{Interval(0, 0), Interval(0, 1)});
    spec.goal = spec.bounds;
    CHECK_THROWS_AS(build_partition(spec, {4, 4}, {0, 1}), std::invalid_argument);
}

TEST_CASE("2D triangle obstacles: conservative labels verified by sampling") {
    RegionSpec spec;
    spec.bounds = Box(std::vector<Interval>{Interval(-1, 1), Interval(-1, 1)});
    spec.goal = Box(std::vector<Interval>{Interval(-0.2, 0.2), Interval(0.7, 1.0)});
    spec.obstacles.push_back(triangle(-0.4, 0.0, 0.3));
    spec.obstacles.push_back(triangle(0.4, -0.2, 0.25));

    const auto part = build_partition(spec, {10, 10}, {0, 1});
    Rng rng(41);
    for (const auto& cell : part.cells) {
        // sampling oracle for box-polytope intersection
        bool found_obstacle_point = false;
        bool found_goal_point = false;
        for (int s = 0; s < 10000; ++s) {
            const auto x = testsupport::random_point(cell.box, rng);
            const std::vector<double> proj{x[0], x[1]};
            for (const auto& poly : spec.obstacles)
                if (point_in_polytope(poly, proj)) found_obstacle_point = true;
            if (in_goal(spec, x)) found_goal_point = true;
            if (cell.label == CellLabel::Goal) CHECK(in_goal(spec, x));
            if (cell.label == CellLabel::Safe) CHECK(in_safe(spec, x, part.discretized_dims));
        }
        if (found_obstacle_point) CHECK(cell.label == CellLabel::Unsafe);
        if (found_goal_point && cell.label == CellLabel::Safe) {
            // a Safe cell must never contain goal points
            CHECK(false);
        }
    }
}

TEST_CASE("partition tiles the bounds measure") {
    RegionSpec spec;
    spec.bounds = Box(std::vector<Interval>{Interval(-1.5, 2.5), Interval(0, 3)});
    spec.goal = Box(std::vector<Interval>{Interval(0, 1), Interval(1, 2)});
    const auto part = build_partition(spec, {7, 9}, {0, 1});
    double total = 0.0;
    for (const auto& cell : part.cells) total += cell.box[0].width() * cell.box[1].width();
    CHECK(total == doctest::Approx(4.0 * 3.0).epsilon(1e-9));
}

TEST_CASE("locate: interior, tie-break, outside") {
    const auto spec = chain_region();
    const auto part = build_partition(spec, {5}, {0});

    CHECK(locate(part, {0.1}) == 0);
    CHECK(locate(part, {0.5}) == 2);  // shared face 0.4|0.6... 0.5 interior of cell 2
    CHECK(locate(part, {0.4}) == 2);  // face point joins the cell that starts there
    CHECK(locate(part, {1.0}) == 4);  // domain edge joins the last (closed) cell
    CHECK(locate(part, {0.0}) == 0);
    CHECK_FALSE(locate(part, {1.2}).has_value());
    CHECK_FALSE(locate(part, {-0.01}).has_value());
}

TEST_CASE("locate agrees with cell boxes on random points") {
    RegionSpec spec;
    spec.bounds = Box(std::vector<Interval>{Interval(-2, 1), Interval(0, 4), Interval(-1, 1)});
    spec.goal = Box(std::vector<Interval>{Interval(-1, 0), Interval(3, 4), Interval(-1, 1)});
    const auto part = build_partition(spec, {6, 5}, {0, 1});
    Rng rng(43);
    for (int s = 0; s < 5000; ++s) {
        const auto x = testsupport::random_point(spec.bounds, rng);
        const auto id = locate(part, x);
        REQUIRE(id.has_value());
        const auto& cell = part.cells[*id];
        for (auto d : part.discretized_dims) {
            CHECK(cell.box[d].lo <= x[d]);
            CHECK(x[d] <= cell.box[d].hi);
        }
        // consistency with a point query
        const Box pt(std::vector<Interval>{Interval::point(x[0]), Interval::point(x[1])});
        const auto cq = cells_intersecting(part, pt);
        bool found = false;
        for (int cid : cq.ids) found = found || cid == *id;
        CHECK(found);
    }
}

TEST_CASE("cells_intersecting singleton, full span, brute force") {
    RegionSpec spec;
    spec.bounds = Box(std::vector<Interval>{Interval(0, 2), Interval(-1, 1)});
    spec.goal = Box(std::vector<Interval>{Interval(1.5, 2), Interval(0.5, 1)});
    const auto part = build_partition(spec, {8, 6}, {0, 1});

    SUBCASE("box inside one cell") {
        const auto& cell = part.cells[10];
        Box q(std::vector<Interval>{
            Interval(cell.box[0].lo + 0.01, cell.box[0].hi - 0.01),
            Interval(cell.box[1].lo + 0.01, cell.box[1].hi - 0.01)});
        const auto cq = cells_intersecting(part, q);
        CHECK_FALSE(cq.outside);
        REQUIRE(cq.ids.size() == 1);
        CHECK(cq.ids[0] == 10);
    }
    SUBCASE("full domain touches every cell without the outside flag") {
        const Box q(std::vector<Interval>{Interval(0, 2), Interval(-1, 1)});
        const auto cq = cells_intersecting(part, q);
        CHECK_FALSE(cq.outside);
        CHECK(cq.ids.size() == part.n_cells());
    }
    SUBCASE("escaping box sets the outside flag") {
        const Box q(std::vector<Interval>{Interval(1.5, 2.5), Interval(0, 0.5)});
        const auto cq = cells_intersecting(part, q);
        CHECK(cq.outside);
        CHECK_FALSE(cq.ids.empty());
    }
    SUBCASE("random boxes match brute-force positive-measure intersection") {
        Rng rng(47);
        for (int trial = 0; trial < 500; ++trial) {
            std::vector<Interval> dims;
            for (int d = 0; d < 2; ++d) {
                const double c = rng.uniform(-1.6, 2.6), r = rng.uniform(0.01, 0.9);
                dims.emplace_back(c - r, c + r);
            }
            const Box q(std::move(dims));
            const auto cq = cells_intersecting(part, q);
            std::vector<int> want;
            for (const auto& cell : part.cells) {
                bool pos = true;
                for (std::size_t k = 0; k < 2; ++k) {
                    const auto d = part.discretized_dims[k];
                    if (!(q[k].lo < cell.box[d].hi && cell.box[d].lo < q[k].hi)) pos = false;
                }
                if (pos) want.push_back(cell.id);
            }
            CHECK(cq.ids == want);
            bool escapes = false;
            for (std::size_t k = 0; k < 2; ++k) {
                const auto d = part.discretized_dims[k];
                if (q[k].lo < part.bounds[d].lo || q[k].hi > part.bounds[d].hi) escapes = true;
            }
            CHECK(cq.outside == escapes);
        }
    }
}

TEST_CASE("undiscretized dims carry the global bounds into cells") {
    RegionSpec spec;
    spec.bounds =
        Box(std::vector<Interval>{Interval(0, 1), Interval(-3, 3), Interval(0.5, 0.9)});
    spec.goal = Box(std::vector<Interval>{Interval(0.8, 1), Interval(-3, 3), Interval(0.5, 0.9)});
    const auto part = build_partition(spec, {5}, {0});
    for (const auto& cell : part.cells) {
        CHECK(cell.box[1].lo == -3.0);
        CHECK(cell.box[1].hi == 3.0);
        CHECK(cell.box[2].lo == 0.5);
        CHECK(cell.box[2].hi == 0.9);
    }
    CHECK(part.cells[4].label == CellLabel::Goal);
    CHECK(part.cells[0].label == CellLabel::Safe);
}
