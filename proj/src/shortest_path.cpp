#include "gridmetric/shortest_path.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace gridmetric {

namespace {

struct HeapEntry {
    double dist;
    int64_t idx;
    bool operator>(const HeapEntry& o) const {
        if (dist != o.dist) return dist > o.dist;
        return idx > o.idx;  // deterministic tie-break: row-major order
    }
};

using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>>;

// Dense Dijkstra workspace over a rectangular region with weights
// materialized into flat arrays (one oracle call per edge, then pure
// array traffic in the loop).
struct DenseDijkstra {
    GridRect region;
    int64_t W = 0, H = 0;
    std::vector<double> wh;    // wh[i]: weight of edge (p, p+(1,0)), +inf at right border
    std::vector<double> wv;    // wv[i]: weight of edge (p, p+(0,1)), +inf at top border
    std::vector<double> dist;
    std::vector<int32_t> pred;

    DenseDijkstra(const WeightGrid& g, GridRect r) : region(r) {
        if (!region.valid()) throw std::invalid_argument("empty dijkstra region");
        W = region.width();
        H = region.height();
        size_t n = static_cast<size_t>(W * H);
        wh.assign(n, kInfWeight);
        wv.assign(n, kInfWeight);
        dist.assign(n, kInfWeight);
        pred.assign(n, -1);
        for (int64_t y = region.y0; y <= region.y1; ++y) {
            size_t row = static_cast<size_t>(y - region.y0) * static_cast<size_t>(W);
            for (int64_t x = region.x0; x <= region.x1; ++x) {
                size_t i = row + static_cast<size_t>(x - region.x0);
                if (x < region.x1) wh[i] = g.weight({{x, y}, Axis::Horizontal});
                if (y < region.y1) wv[i] = g.weight({{x, y}, Axis::Vertical});
            }
        }
    }

    size_t index_of(GridPoint p) const {
        return static_cast<size_t>(p.y - region.y0) * static_cast<size_t>(W) +
               static_cast<size_t>(p.x - region.x0);
    }

    // Runs until `until` (if given) is settled, or to exhaustion.
    // Returns true if `until` was settled.
    bool run(GridPoint source, const GridPoint* until) {
        int64_t stop_idx = until ? static_cast<int64_t>(index_of(*until)) : -1;
        MinHeap heap;
        size_t s = index_of(source);
        dist[s] = 0.0;
        heap.push({0.0, static_cast<int64_t>(s)});
        while (!heap.empty()) {
            auto [d, idx] = heap.top();
            heap.pop();
            if (d > dist[idx]) continue;  // stale entry
            if (idx == stop_idx) return true;
            int64_t x = idx % W, y = idx / W;
            auto relax = [&](int64_t j, double w) {
                if (w == kInfWeight) return;
                double nd = d + w;
                if (nd < dist[j]) {
                    dist[j] = nd;
                    pred[j] = static_cast<int32_t>(idx);
                    heap.push({nd, j});
                }
            };
            if (x < W - 1) relax(idx + 1, wh[idx]);
            if (x > 0) relax(idx - 1, wh[idx - 1]);
            if (y < H - 1) relax(idx + W, wv[idx]);
            if (y > 0) relax(idx - W, wv[idx - W]);
        }
        return false;
    }
};

GridRect corridor_region(const WeightGrid& g, GridPoint s, GridPoint t, double margin) {
    if (margin < 0.0) throw std::invalid_argument("negative corridor margin");
    int64_t m = static_cast<int64_t>(std::ceil(margin));
    GridRect box{std::min(s.x, t.x), std::min(s.y, t.y), std::max(s.x, t.x), std::max(s.y, t.y)};
    GridRect r = box.dilated(m).intersect(g.window());
    if (!r.valid() || !r.contains(s) || !r.contains(t))
        throw std::invalid_argument("source/target outside corridor after window clipping");
    return r;
}

}  // namespace

std::optional<double> shortest_dist(const WeightGrid& weights, GridPoint source, GridPoint target,
                                    double corridor_margin) {
    GridRect r = corridor_region(weights, source, target, corridor_margin);
    DenseDijkstra dj(weights, r);
    if (!dj.run(source, &target)) return std::nullopt;
    return dj.dist[dj.index_of(target)];
}

std::optional<std::vector<GridPoint>> shortest_path_trace(const WeightGrid& weights,
                                                          GridPoint source, GridPoint target,
                                                          double corridor_margin) {
    GridRect r = corridor_region(weights, source, target, corridor_margin);
    DenseDijkstra dj(weights, r);
    if (!dj.run(source, &target)) return std::nullopt;
    std::vector<GridPoint> trace;
    int64_t W = r.width();
    int64_t idx = static_cast<int64_t>(dj.index_of(target));
    while (idx >= 0) {
        trace.push_back({r.x0 + idx % W, r.y0 + idx / W});
        idx = dj.pred[idx];
    }
    std::reverse(trace.begin(), trace.end());
    return trace;
}

StableDist stable_shortest_dist(const WeightGrid& weights, GridPoint source, GridPoint target,
                                double corridor_margin) {
    StableDist out;
    auto d0 = shortest_dist(weights, source, target, corridor_margin);
    auto d1 = shortest_dist(weights, source, target, corridor_margin * 1.5);
    out.dist = d0 ? *d0 : kInfWeight;
    out.dist_wide = d1 ? *d1 : kInfWeight;
    if (d0 && d1) out.stable = std::abs(*d0 - *d1) < 1e-3 * std::max(*d1, 1.0);
    return out;
}

DistanceField compute_distance_field(const WeightGrid& weights, GridPoint source, GridRect region) {
    GridRect r = region.intersect(weights.window());
    if (!r.valid() || !r.contains(source))
        throw std::invalid_argument("source outside distance-field region");
    DenseDijkstra dj(weights, r);
    dj.run(source, nullptr);
    DistanceField f;
    f.source = source;
    f.region = r;
    f.dist = std::move(dj.dist);
    f.pred = std::move(dj.pred);
    return f;
}

}  // namespace gridmetric
