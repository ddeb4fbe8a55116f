#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridmetric {

constexpr double kInfWeight = std::numeric_limits<double>::infinity();

/// A lattice point. Coordinate arithmetic is overflow-checked so that
/// very large constructions fail loudly instead of wrapping.
struct GridPoint {
    int64_t x = 0;
    int64_t y = 0;

    bool operator==(const GridPoint&) const = default;
    // Row-major order (y, then x); used for deterministic tie-breaking.
    auto operator<=>(const GridPoint& o) const {
        if (auto c = y <=> o.y; c != 0) return c;
        return x <=> o.x;
    }

    GridPoint offset(int64_t dx, int64_t dy) const {
        GridPoint r;
        if (__builtin_add_overflow(x, dx, &r.x) || __builtin_add_overflow(y, dy, &r.y))
            throw std::overflow_error("GridPoint coordinate overflow");
        return r;
    }
};

inline double euclid(GridPoint a, GridPoint b) {
    return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}
inline int64_t l1(GridPoint a, GridPoint b) {
    return std::llabs(a.x - b.x) + std::llabs(a.y - b.y);
}

enum class Axis : uint8_t { Horizontal = 0, Vertical = 1 };

/// Canonical name for one grid edge: from `base` to base+(1,0) or base+(0,1).
struct EdgeKey {
    GridPoint base;
    Axis axis = Axis::Horizontal;

    bool operator==(const EdgeKey&) const = default;

    GridPoint other() const {
        return axis == Axis::Horizontal ? base.offset(1, 0) : base.offset(0, 1);
    }

    /// Canonical key of the edge joining two adjacent points.
    static EdgeKey between(GridPoint a, GridPoint b) {
        if (a > b) std::swap(a, b);
        if (b.x == a.x + 1 && b.y == a.y) return {a, Axis::Horizontal};
        if (b.y == a.y + 1 && b.x == a.x) return {a, Axis::Vertical};
        throw std::invalid_argument("EdgeKey::between: points not adjacent");
    }
};

struct EdgeKeyHash {
    size_t operator()(const EdgeKey& k) const {
        uint64_t h = static_cast<uint64_t>(k.base.x) * 0x9e3779b97f4a7c15ULL;
        h ^= static_cast<uint64_t>(k.base.y) + 0x517cc1b727220a95ULL + (h << 6) + (h >> 2);
        return h * 2 + static_cast<uint64_t>(k.axis);
    }
};

struct GridPointHash {
    size_t operator()(const GridPoint& p) const {
        uint64_t h = static_cast<uint64_t>(p.x) * 0xbf58476d1ce4e5b9ULL;
        return h ^ (static_cast<uint64_t>(p.y) + 0x94d049bb133111ebULL + (h << 7) + (h >> 3));
    }
};

/// Inclusive rectangle of grid points.
struct GridRect {
    int64_t x0 = 0, y0 = 0, x1 = -1, y1 = -1;

    bool contains(GridPoint p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
    int64_t width() const { return x1 - x0 + 1; }
    int64_t height() const { return y1 - y0 + 1; }
    int64_t num_points() const { return width() * height(); }
    GridRect intersect(const GridRect& o) const {
        return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
    }
    GridRect dilated(int64_t d) const { return {x0 - d, y0 - d, x1 + d, y1 + d}; }
    bool valid() const { return x0 <= x1 && y0 <= y1; }
};

/// An edge-weight assignment over a window of the grid. Either a dense
/// array of weights or a lazy pure-function oracle; both are immutable
/// after construction and safe for concurrent queries.
class WeightGrid {
public:
    using Oracle = std::function<double(const EdgeKey&)>;

    static WeightGrid dense(GridRect window, double fill = 1.0) {
        WeightGrid g;
        g.window_ = window;
        g.dense_.assign(static_cast<size_t>(window.num_points()) * 2, fill);
        return g;
    }

    static WeightGrid lazy(GridRect window, Oracle oracle, double default_weight = kInfWeight) {
        WeightGrid g;
        g.window_ = window;
        g.oracle_ = std::move(oracle);
        g.default_ = default_weight;
        return g;
    }

    const GridRect& window() const { return window_; }
    bool is_dense() const { return !dense_.empty(); }

    /// Weight of the edge; edges with an endpoint outside the window
    /// report the default weight.
    double weight(const EdgeKey& k) const {
        if (!window_.contains(k.base) || !window_.contains(k.other())) return default_;
        if (!dense_.empty()) return dense_[dense_index(k)];
        return oracle_(k);
    }

    void set(const EdgeKey& k, double w) {
        if (dense_.empty()) throw std::logic_error("WeightGrid::set on lazy grid");
        if (w < 0.0) throw std::invalid_argument("negative edge weight");
        dense_[dense_index(k)] = w;
    }

private:
    size_t dense_index(const EdgeKey& k) const {
        size_t row = static_cast<size_t>(k.base.y - window_.y0);
        size_t col = static_cast<size_t>(k.base.x - window_.x0);
        return (row * static_cast<size_t>(window_.width()) + col) * 2 +
               static_cast<size_t>(k.axis);
    }

    GridRect window_;
    std::vector<double> dense_;
    Oracle oracle_;
    double default_ = kInfWeight;
};

/// Result of a single-source shortest-path computation over a region.
/// dist/pred are stored densely over `region`; unreached points carry
/// +inf distance.
struct DistanceField {
    GridPoint source;
    GridRect region;
    std::vector<double> dist;      // region.num_points() entries, row-major
    std::vector<int32_t> pred;     // index of predecessor, -1 for none

    size_t index_of(GridPoint p) const {
        return static_cast<size_t>(p.y - region.y0) * static_cast<size_t>(region.width()) +
               static_cast<size_t>(p.x - region.x0);
    }
    GridPoint point_at(size_t idx) const {
        int64_t w = region.width();
        return {region.x0 + static_cast<int64_t>(idx) % w,
                region.y0 + static_cast<int64_t>(idx) / w};
    }
    double dist_at(GridPoint p) const {
        return region.contains(p) ? dist[index_of(p)] : kInfWeight;
    }

    void write_csv(const std::string& path) const;
    void write_jsonl(const std::string& path) const;
};

void write_trace_csv(const std::string& path, const std::vector<GridPoint>& trace);
void write_trace_jsonl(const std::string& path, const std::vector<GridPoint>& trace);

}  // namespace gridmetric
