// Copyright (c) reachcert contributors.
// SPDX-License-Identifier: Apache-2.0
#ifndef REACHCERT_SVG_HPP
#define REACHCERT_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "reachcert/abstraction.hpp"
#include "reachcert/io.hpp"

namespace reachcert {

namespace detail {

// compact viridis-like ramp
inline std::string heat_color(double v) {
    static const double stops[][3] = {
        {68, 1, 84},    // 0.00
        {59, 82, 139},  // 0.25
        {33, 145, 140}, // 0.50
        {94, 201, 98},  // 0.75
        {253, 231, 37}, // 1.00
    };
    v = std::clamp(v, 0.0, 1.0);
    const double pos = v * 4.0;
    const int i = std::min(3, static_cast<int>(pos));
    const double t = pos - i;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(stops[i][0] + t * (stops[i + 1][0] - stops[i][0])),
                  static_cast<int>(stops[i][1] + t * (stops[i + 1][1] - stops[i][1])),
                  static_cast<int>(stops[i][2] + t * (stops[i + 1][2] - stops[i][2])));
    return buf;
}

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// vertices of a 2D convex polytope given as half-planes
inline std::vector<std::pair<double, double>> polytope_vertices(const ConvexPolytope& poly) {
    std::vector<std::pair<double, double>> verts;
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double a1 = poly[i].a[0], b1 = poly[i].a[1], c1 = poly[i].b;
            const double a2 = poly[j].a[0], b2 = poly[j].a[1], c2 = poly[j].b;
            const double det = a1 * b2 - a2 * b1;
            if (std::abs(det) < 1e-12) continue;
            const double x = (c1 * b2 - c2 * b1) / det;
            const double y = (a1 * c2 - a2 * c1) / det;
            bool inside = true;
            for (const auto& hp : poly)
                if (hp.a[0] * x + hp.a[1] * y > hp.b + 1e-9) inside = false;
            if (inside) verts.emplace_back(x, y);
        }
    }
    if (verts.size() < 3) return verts;
    double cx = 0, cy = 0;
    for (const auto& [x, y] : verts) {
        cx += x;
        cy += y;
    }
    cx /= verts.size();
    cy /= verts.size();
    std::sort(verts.begin(), verts.end(), [&](const auto& p, const auto& q) {
        return std::atan2(p.second - cy, p.first - cx) < std::atan2(q.second - cy, q.first - cx);
    });
    return verts;
}

} // namespace detail

// Self-contained SVG heatmap of one value row over a 2-dim-discretized
// partition, with goal and obstacle overlays. The y axis points up.
inline std::string render_heatmap_svg(const Partition& part, const std::vector<double>& values,
                                      const RegionSpec& region, const std::string& title) {
    if (part.discretized_dims.size() != 2)
        throw std::invalid_argument("render_heatmap_svg: two discretized dims required");
    const auto dx = part.discretized_dims[0], dy = part.discretized_dims[1];
    const double W = 560.0, H = 560.0, margin = 50.0, bar_w = 18.0;
    const double x0 = part.bounds[dx].lo, x1 = part.bounds[dx].hi;
    const double y0 = part.bounds[dy].lo, y1 = part.bounds[dy].hi;
    auto px = [&](double x) { return margin + (x - x0) / (x1 - x0) * W; };
    auto py = [&](double y) { return margin + (y1 - y) / (y1 - y0) * H; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << detail::svg_num(W + 2 * margin + 60) << "\" height=\""
        << detail::svg_num(H + 2 * margin) << "\">\n";
    out << "<text x=\"" << detail::svg_num(margin) << "\" y=\"28\" font-family=\"sans-serif\" "
           "font-size=\"15\">"
        << title << "</text>\n";

    for (const auto& cell : part.cells) {
        const double v = values[cell.id];
        out << "<rect x=\"" << detail::svg_num(px(cell.box[dx].lo)) << "\" y=\""
            << detail::svg_num(py(cell.box[dy].hi)) << "\" width=\""
            << detail::svg_num(px(cell.box[dx].hi) - px(cell.box[dx].lo)) << "\" height=\""
            << detail::svg_num(py(cell.box[dy].lo) - py(cell.box[dy].hi)) << "\" fill=\""
            << detail::heat_color(v) << "\"/>\n";
    }

    // goal outline
    out << "<rect x=\"" << detail::svg_num(px(region.goal[dx].lo)) << "\" y=\""
        << detail::svg_num(py(region.goal[dy].hi)) << "\" width=\""
        << detail::svg_num(px(region.goal[dx].hi) - px(region.goal[dx].lo)) << "\" height=\""
        << detail::svg_num(py(region.goal[dy].lo) - py(region.goal[dy].hi))
        << "\" fill=\"none\" stroke=\"#00d000\" stroke-width=\"2.5\"/>\n";

    // obstacles
    for (const auto& poly : region.obstacles) {
        const auto verts = detail::polytope_vertices(poly);
        if (verts.size() < 3) continue;
        out << "<polygon points=\"";
        for (const auto& [vx, vy] : verts)
            out << detail::svg_num(px(vx)) << "," << detail::svg_num(py(vy)) << " ";
        out << "\" fill=\"#303030\" fill-opacity=\"0.75\" stroke=\"#ff4040\" "
               "stroke-width=\"1.5\"/>\n";
    }

    // frame and color bar
    out << "<rect x=\"" << detail::svg_num(margin) << "\" y=\"" << detail::svg_num(margin)
        << "\" width=\"" << detail::svg_num(W) << "\" height=\"" << detail::svg_num(H)
        << "\" fill=\"none\" stroke=\"#404040\" stroke-width=\"1\"/>\n";
    const double bx = margin + W + 18;
    const int bar_steps = 64;
    for (int i = 0; i < bar_steps; ++i) {
        const double v = 1.0 - static_cast<double>(i) / (bar_steps - 1);
        out << "<rect x=\"" << detail::svg_num(bx) << "\" y=\""
            << detail::svg_num(margin + i * H / bar_steps) << "\" width=\""
            << detail::svg_num(bar_w) << "\" height=\"" << detail::svg_num(H / bar_steps + 0.5)
            << "\" fill=\"" << detail::heat_color(v) << "\"/>\n";
    }
    out << "<text x=\"" << detail::svg_num(bx + bar_w + 4) << "\" y=\""
        << detail::svg_num(margin + 10) << "\" font-family=\"sans-serif\" font-size=\"12\">1"
        << "</text>\n";
    out << "<text x=\"" << detail::svg_num(bx + bar_w + 4) << "\" y=\""
        << detail::svg_num(margin + H) << "\" font-family=\"sans-serif\" font-size=\"12\">0"
        << "</text>\n";

    // axis labels
    out << "<text x=\"" << detail::svg_num(margin) << "\" y=\""
        << detail::svg_num(margin + H + 28) << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << "dim " << dx << ": [" << detail::svg_num(x0) << ", " << detail::svg_num(x1)
        << "]   dim " << dy << ": [" << detail::svg_num(y0) << ", " << detail::svg_num(y1)
        << "]</text>\n";
    out << "</svg>\n";
    return out.str();
}

inline void save_heatmap_svg(const Partition& part, const std::vector<double>& values,
                             const RegionSpec& region, const std::string& title,
                             const std::string& path) {
    detail::write_text_file(path, render_heatmap_svg(part, values, region, title));
}

} // namespace reachcert

#endif
