#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "firefront/grid.hpp"

namespace firefront {

struct Polyline {
    std::vector<std::array<double, 2>> pts;
    bool closed = false;
};

namespace detail {

// Edge key: (node index, axis). Axis 0 = edge from node (i,j) to (i+1,j),
// axis 1 = edge to (i,j+1). Interpolated vertices computed from the same two
// node values are bitwise identical on shared edges, so keys chain exactly.
using EdgeKey = std::pair<std::int64_t, int>;

inline EdgeKey edge_key(int i, int j, int axis, int n_y) {
    return {static_cast<std::int64_t>(i) * n_y + j, axis};
}

}  // namespace detail

/// Marching-squares extraction of the zero level set with linear
/// interpolation along cell edges. "Inside" is u < 0; a node with u == 0
/// counts as outside, which keeps linear fields exact. Returns chained
/// polylines; empty when u has uniform sign.
inline std::vector<Polyline> extract_zero_level_set(const ScalarField& u) {
    using detail::EdgeKey;
    const GridSpec& g = u.spec;
    const int nx = g.n_x, ny = g.n_y;

    struct Segment {
        EdgeKey a, b;
    };
    std::vector<Segment> segments;

    for (int i = 0; i + 1 < nx; ++i) {
        for (int j = 0; j + 1 < ny; ++j) {
            const double v00 = u.at(i, j);
            const double v10 = u.at(i + 1, j);
            const double v01 = u.at(i, j + 1);
            const double v11 = u.at(i + 1, j + 1);
            int mask = (v00 < 0.0 ? 1 : 0) | (v10 < 0.0 ? 2 : 0) | (v11 < 0.0 ? 4 : 0) |
                       (v01 < 0.0 ? 8 : 0);
            if (mask == 0 || mask == 15) continue;

            const EdgeKey bottom = detail::edge_key(i, j, 0, ny);      // v00-v10
            const EdgeKey top = detail::edge_key(i, j + 1, 0, ny);     // v01-v11
            const EdgeKey left = detail::edge_key(i, j, 1, ny);        // v00-v01
            const EdgeKey right = detail::edge_key(i + 1, j, 1, ny);   // v10-v11

            auto add = [&](EdgeKey a, EdgeKey b) { segments.push_back({a, b}); };
            switch (mask) {
                case 1: case 14: add(bottom, left); break;
                case 2: case 13: add(bottom, right); break;
                case 3: case 12: add(left, right); break;
                case 4: case 11: add(right, top); break;
                case 6: case 9:  add(bottom, top); break;
                case 7: case 8:  add(left, top); break;
                case 5: case 10: {
                    // saddle: disambiguate with the cell-centre average
                    const double centre = 0.25 * (v00 + v10 + v01 + v11);
                    const bool centre_in = centre < 0.0;
                    if ((mask == 5) == centre_in) {
                        add(bottom, right);
                        add(left, top);
                    } else {
                        add(bottom, left);
                        add(right, top);
                    }
                    break;
                }
                default: break;
            }
        }
    }

    // vertex position on an edge
    auto vertex = [&](const EdgeKey& e) -> std::array<double, 2> {
        const int i = static_cast<int>(e.first / ny);
        const int j = static_cast<int>(e.first % ny);
        if (e.second == 0) {
            const double va = u.at(i, j), vb = u.at(i + 1, j);
            const double t = va / (va - vb);
            return {g.x(i) + t * g.dx(), g.y(j)};
        }
        const double va = u.at(i, j), vb = u.at(i, j + 1);
        const double t = va / (va - vb);
        return {g.x(i), g.y(j) + t * g.dy()};
    };

    // chain segments into polylines by shared edge keys
    std::multimap<EdgeKey, std::size_t> by_edge;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        by_edge.emplace(segments[s].a, s);
        by_edge.emplace(segments[s].b, s);
    }
    std::vector<bool> used(segments.size(), false);
    std::vector<Polyline> out;

    auto take_next = [&](const EdgeKey& at) -> std::size_t {
        auto [lo, hi] = by_edge.equal_range(at);
        for (auto it = lo; it != hi; ++it)
            if (!used[it->second]) return it->second;
        return segments.size();
    };

    for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
        if (used[s0]) continue;
        used[s0] = true;
        std::vector<EdgeKey> chain = {segments[s0].a, segments[s0].b};
        // extend forward
        for (;;) {
            std::size_t nxt = take_next(chain.back());
            if (nxt == segments.size()) break;
            used[nxt] = true;
            chain.push_back(segments[nxt].a == chain.back() ? segments[nxt].b : segments[nxt].a);
        }
        // extend backward
        for (;;) {
            std::size_t nxt = take_next(chain.front());
            if (nxt == segments.size()) break;
            used[nxt] = true;
            chain.insert(chain.begin(),
                         segments[nxt].a == chain.front() ? segments[nxt].b : segments[nxt].a);
        }
        Polyline p;
        p.closed = chain.size() > 2 && chain.front() == chain.back();
        if (p.closed) chain.pop_back();
        p.pts.reserve(chain.size());
        for (const EdgeKey& e : chain) p.pts.push_back(vertex(e));
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace firefront
