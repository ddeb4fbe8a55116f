#pragma once

// Brute-force reference implementations used only by tests. These stay
// independent of the library's shortest-path code paths.

#include <algorithm>
#include <vector>

#include "gridmetric/grid.hpp"

namespace gridmetric::testing {

/// Bellman-Ford over the full region: |V|-1 sweeps of every edge.
inline std::vector<double> bellman_ford_field(const WeightGrid& g, GridPoint src,
                                              GridRect region) {
    int64_t W = region.width(), H = region.height();
    std::vector<double> dist(static_cast<size_t>(W * H), kInfWeight);
    auto idx = [&](int64_t x, int64_t y) {
        return static_cast<size_t>((y - region.y0) * W + (x - region.x0));
    };
    dist[idx(src.x, src.y)] = 0.0;
    for (int64_t round = 0; round < W * H; ++round) {
        bool changed = false;
        for (int64_t y = region.y0; y <= region.y1; ++y)
            for (int64_t x = region.x0; x <= region.x1; ++x) {
                auto relax = [&](GridPoint a, GridPoint b, double w) {
                    if (w == kInfWeight) return;
                    double nd = dist[idx(a.x, a.y)] + w;
                    if (nd < dist[idx(b.x, b.y)]) {
                        dist[idx(b.x, b.y)] = nd;
                        changed = true;
                    }
                };
                if (x < region.x1) {
                    double w = g.weight({{x, y}, Axis::Horizontal});
                    relax({x, y}, {x + 1, y}, w);
                    relax({x + 1, y}, {x, y}, w);
                }
                if (y < region.y1) {
                    double w = g.weight({{x, y}, Axis::Vertical});
                    relax({x, y}, {x, y + 1}, w);
                    relax({x, y + 1}, {x, y}, w);
                }
            }
        if (!changed) break;
    }
    return dist;
}

inline double bellman_ford_dist(const WeightGrid& g, GridPoint src, GridPoint dst,
                                GridRect region) {
    auto dist = bellman_ford_field(g, src, region);
    return dist[static_cast<size_t>((dst.y - region.y0) * region.width() + (dst.x - region.x0))];
}

/// Minimum over all C(|dx|+|dy|, |dx|) monotone paths, by full enumeration.
inline double enumerate_monotone_min(const WeightGrid& g, GridPoint u, GridPoint v) {
    int64_t dx = v.x - u.x, dy = v.y - u.y;
    int sx = dx >= 0 ? 1 : -1, sy = dy >= 0 ? 1 : -1;
    int64_t nx = std::llabs(dx), ny = std::llabs(dy);
    double best = kInfWeight;
    struct Frame {
        GridPoint at;
        int64_t ix, iy;
        double cost;
    };
    std::vector<Frame> stack{{u, 0, 0, 0.0}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.ix == nx && f.iy == ny) {
            best = std::min(best, f.cost);
            continue;
        }
        if (f.ix < nx) {
            GridPoint b = f.at.offset(sx, 0);
            stack.push_back({b, f.ix + 1, f.iy, f.cost + g.weight(EdgeKey::between(f.at, b))});
        }
        if (f.iy < ny) {
            GridPoint b = f.at.offset(0, sy);
            stack.push_back({b, f.ix, f.iy + 1, f.cost + g.weight(EdgeKey::between(f.at, b))});
        }
    }
    return best;
}

}  // namespace gridmetric::testing
