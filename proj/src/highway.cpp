#include "gridmetric/highway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <json.hpp>

#include "gridmetric/shortest_path.hpp"

namespace gridmetric::highway {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Relative nudge resolving cell-boundary degeneracies (lines through
// square corners); keeps rasterized staircases connected.
inline double nudge(double v) { return 1e-12 * std::max(1.0, std::abs(v)); }

int64_t ifloor(double v) { return static_cast<int64_t>(std::floor(v)); }

// Cells y with [y-0.5, y+0.5) meeting the closed value range [lo, hi].
std::pair<int64_t, int64_t> cell_range(double lo, double hi) {
    int64_t clo = ifloor(lo - 0.5 + nudge(lo)) + 1;
    int64_t chi = ifloor(hi + 0.5 + nudge(hi));
    return {clo, chi};
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameters and lines

LevelParams LevelParams::from_n(int64_t n) {
    if (n < 2) throw std::invalid_argument("LevelParams: n must be >= 2");
    auto fifth_root = [](int64_t n) {
        int64_t k = static_cast<int64_t>(std::floor(std::pow(static_cast<double>(n), 0.2)));
        while (k > 1 && k * k * k * k * k > n) --k;
        while ((k + 1) * (k + 1) * (k + 1) * (k + 1) * (k + 1) <= n) ++k;
        return k;
    };
    LevelParams p;
    p.n = n;
    int64_t k = fifth_root(n);
    p.levels.push_back(k);
    while (p.levels.back() >= 100) {
        int64_t next = static_cast<int64_t>(std::floor(std::sqrt(static_cast<double>(p.levels.back()))));
        while (next * next > p.levels.back()) --next;
        while ((next + 1) * (next + 1) <= p.levels.back()) ++next;
        p.levels.push_back(next);
    }
    return p;
}

LevelParams LevelParams::custom(int64_t n, std::vector<int64_t> ks) {
    if (ks.empty()) throw std::invalid_argument("LevelParams: empty level list");
    for (size_t i = 0; i + 1 < ks.size(); ++i)
        if (ks[i] <= ks[i + 1]) throw std::invalid_argument("LevelParams: levels must decrease");
    if (ks.front() < 1) throw std::invalid_argument("LevelParams: k must be >= 1");
    LevelParams p;
    p.n = n;
    p.levels = std::move(ks);
    return p;
}

double LineSpec::theta() const { return kPi * static_cast<double>(angle_index) / static_cast<double>(k); }
Vec2 LineSpec::dir() const {
    double t = theta();
    return {std::cos(t), std::sin(t)};
}
Vec2 LineSpec::normal() const {
    double t = theta();
    return {-std::sin(t), std::cos(t)};
}
double LineSpec::offset_dist() const {
    double k4 = static_cast<double>(k) * k * k * k;
    return static_cast<double>(offset_index) * k4;
}
Vec2 LineSpec::base() const { return normal() * offset_dist(); }
Vec2 LineSpec::point_at(double s) const { return base() + dir() * s; }

double LineSpec::weight() const {
    Vec2 d = dir();
    return 1.0 / (std::abs(d.x) + std::abs(d.y));
}

std::vector<TrimmedSegment> LeveledSegments::all() const {
    std::vector<TrimmedSegment> out;
    for (auto& lv : by_level) out.insert(out.end(), lv.begin(), lv.end());
    return out;
}

namespace {

// Arc-length interval of line ∩ rect (slab clipping); empty -> nullopt.
std::optional<std::pair<double, double>> line_rect_span(const LineSpec& line, const Rect& r) {
    Vec2 b = line.base(), d = line.dir();
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    auto clip = [&](double p0, double dp, double a0, double a1) {
        if (std::abs(dp) < 1e-300) return p0 >= a0 && p0 <= a1;
        double t0 = (a0 - p0) / dp, t1 = (a1 - p0) / dp;
        if (t0 > t1) std::swap(t0, t1);
        lo = std::max(lo, t0);
        hi = std::min(hi, t1);
        return true;
    };
    if (!clip(b.x, d.x, r.x0, r.x1)) return std::nullopt;
    if (!clip(b.y, d.y, r.y0, r.y1)) return std::nullopt;
    if (lo >= hi) return std::nullopt;
    return std::make_pair(lo, hi);
}

std::vector<LineSpec> enumerate_lines(int level, int64_t k, const Rect& envelope) {
    std::vector<LineSpec> lines;
    double k4 = static_cast<double>(k) * k * k * k;
    for (int64_t j = 0; j < k; ++j) {
        LineSpec proto{level, k, j, 0};
        Vec2 n = proto.normal();
        // Offset range over the envelope corners.
        double o0 = Vec2{envelope.x0, envelope.y0}.dot(n);
        double o1 = Vec2{envelope.x1, envelope.y0}.dot(n);
        double o2 = Vec2{envelope.x0, envelope.y1}.dot(n);
        double o3 = Vec2{envelope.x1, envelope.y1}.dot(n);
        double omin = std::min({o0, o1, o2, o3});
        double omax = std::max({o0, o1, o2, o3});
        int64_t tmin = static_cast<int64_t>(std::ceil(omin / k4));
        int64_t tmax = static_cast<int64_t>(std::floor(omax / k4));
        for (int64_t t = tmin; t <= tmax; ++t) lines.push_back({level, k, j, t});
    }
    return lines;
}

}  // namespace

// ---------------------------------------------------------------------------
// Trimming

std::optional<std::pair<double, double>> hippodrome_line_interval(Vec2 base, Vec2 dir, Vec2 q0,
                                                                  Vec2 q1, double delta) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    auto add = [&](double a, double b) {
        if (a > b) return;
        lo = std::min(lo, a);
        hi = std::max(hi, b);
    };
    // Cap disks at q0 and q1: |base + s*dir - q|^2 <= delta^2.
    auto cap = [&](Vec2 q) {
        Vec2 w = base - q;
        double bq = w.dot(dir);  // |dir| = 1
        double cq = w.norm2() - delta * delta;
        double disc = bq * bq - cq;
        if (disc < 0.0) return;
        double r = std::sqrt(disc);
        add(-bq - r, -bq + r);
    };
    cap(q0);
    cap(q1);
    Vec2 u = q1 - q0;
    double len2 = u.norm2();
    if (len2 > 0.0) {
        Vec2 nq{-u.y / std::sqrt(len2), u.x / std::sqrt(len2)};
        double alpha = (base - q0).dot(nq);
        double beta = dir.dot(nq);
        double g0 = (base - q0).dot(u);  // g(s) = g0 + s * gd, tau = g/len2
        double gd = dir.dot(u);
        // Middle band: |alpha + beta s| <= delta AND 0 <= g <= len2.
        double m_lo, m_hi;
        bool band;
        if (std::abs(beta) < 1e-14) {
            band = std::abs(alpha) <= delta;
            m_lo = -std::numeric_limits<double>::infinity();
            m_hi = std::numeric_limits<double>::infinity();
        } else {
            band = true;
            m_lo = (-delta - alpha) / beta;
            m_hi = (delta - alpha) / beta;
            if (m_lo > m_hi) std::swap(m_lo, m_hi);
        }
        if (band) {
            double t_lo, t_hi;
            if (std::abs(gd) < 1e-14) {
                bool inside = g0 >= 0.0 && g0 <= len2;
                t_lo = inside ? -std::numeric_limits<double>::infinity()
                              : std::numeric_limits<double>::infinity();
                t_hi = inside ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
            } else {
                t_lo = (0.0 - g0) / gd;
                t_hi = (len2 - g0) / gd;
                if (t_lo > t_hi) std::swap(t_lo, t_hi);
            }
            add(std::max(m_lo, t_lo), std::min(m_hi, t_hi));
        }
    }
    if (lo > hi) return std::nullopt;
    return std::make_pair(lo, hi);
}

std::vector<std::pair<double, double>> trim_single_line(const LineSpec& line, double s_lo,
                                                        double s_hi,
                                                        const std::vector<LineSpec>& same_level,
                                                        const std::vector<TrimmedSegment>& lower,
                                                        double k) {
    IntervalSet residual(s_lo, s_hi);
    Vec2 b = line.base(), d = line.dir();

    // Step 1: strip subtraction against the other level-i lines. Parallel
    // lines of the same angle sit k^4 >= 2k apart and never cut.
    for (const LineSpec& other : same_level) {
        if (other.angle_index == line.angle_index) continue;
        double s = std::sin(other.theta() - line.theta());
        double center = (other.base() - b).dot(other.normal()) / d.dot(other.normal());
        double half = k / std::abs(s);
        residual.subtract(center - half, center + half);
        if (residual.empty()) return {};
    }

    // Step 2: hippodrome subtraction against lower-level segments, with the
    // minimum-gap extension rule. The interval [A, B] is computed on the
    // full line; A is the smaller parameter and the extension proceeds in
    // the +parameter direction.
    for (const TrimmedSegment& s : lower) {
        auto ab = hippodrome_line_interval(b, d, s.p0(), s.p1(), k);
        if (!ab) continue;
        double A = ab->first, B = ab->second;
        if (B - A >= k)
            residual.subtract(A, B);
        else
            residual.subtract(A, A + k);
        if (residual.empty()) return {};
    }
    return residual.intervals();
}

LeveledSegments trim_lines(const LevelParams& params, Rect window, bool parallel) {
    LeveledSegments out;
    out.params = params;
    out.window = window;
    out.by_level.resize(params.levels.size());

    int64_t kmax = params.levels.front();
    Rect keep_env = window.dilated(3.0 * static_cast<double>(kmax));
    Rect cut_env = keep_env.dilated(3.0 * static_cast<double>(kmax));

    for (size_t li = 0; li < params.levels.size(); ++li) {
        int level = static_cast<int>(li) + 1;
        int64_t k = params.levels[li];
        double kd = static_cast<double>(k);
        std::vector<LineSpec> kept_lines = enumerate_lines(level, k, keep_env);
        std::vector<LineSpec> cutters = enumerate_lines(level, k, cut_env);

        // Lower-level segments, in canonical order (already level by level,
        // line by line, interval ascending).
        std::vector<TrimmedSegment> lower;
        for (size_t lj = 0; lj < li; ++lj)
            lower.insert(lower.end(), out.by_level[lj].begin(), out.by_level[lj].end());

        std::vector<std::vector<TrimmedSegment>> slots(kept_lines.size());
        auto trim_one = [&](size_t idx) {
            const LineSpec& line = kept_lines[idx];
            auto span = line_rect_span(line, keep_env);
            if (!span) return;
            for (auto& [a, c] :
                 trim_single_line(line, span->first, span->second, cutters, lower, kd))
                if (c - a > 0.0) slots[idx].push_back({line, a, c});
        };

        if (parallel) {
#pragma omp parallel for schedule(dynamic)
            for (size_t idx = 0; idx < kept_lines.size(); ++idx) trim_one(idx);
        } else {
            for (size_t idx = 0; idx < kept_lines.size(); ++idx) trim_one(idx);
        }
        for (auto& s : slots)
            out.by_level[li].insert(out.by_level[li].end(), s.begin(), s.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rasterization

namespace {

// Driving frame: enumerate along the axis the line advances fastest in.
struct Raster {
    bool x_driving;
    // In the driving frame the line is cross = slope * driving + icept.
    double slope, icept;
    double d0, d1;  // driving-coordinate extent of the segment (sorted)

    explicit Raster(const TrimmedSegment& seg) {
        Vec2 dir = seg.parent.dir();
        Vec2 p0 = seg.p0(), p1 = seg.p1();
        x_driving = std::abs(dir.x) >= std::abs(dir.y);
        double ax, ay, bx, by;
        if (x_driving) {
            ax = p0.x, ay = p0.y, bx = p1.x, by = p1.y;
        } else {
            ax = p0.y, ay = p0.x, bx = p1.y, by = p1.x;
        }
        slope = (by - ay) / (bx - ax);
        icept = ay - slope * ax;
        d0 = std::min(ax, bx);
        d1 = std::max(ax, bx);
    }

    // Inclusive cell range in the cross axis for driving column dc,
    // empty (first > second) if the column misses the segment.
    std::pair<int64_t, int64_t> column_cells(int64_t dc) const {
        double cd = static_cast<double>(dc);
        double lo = std::max(cd - 0.5, d0);
        double hi = std::min(cd + 0.5, d1);
        if (lo > hi + nudge(hi)) return {1, 0};
        double c0 = slope * lo + icept;
        double c1 = slope * hi + icept;
        if (c0 > c1) std::swap(c0, c1);
        return cell_range(c0, c1);
    }

    std::pair<int64_t, int64_t> column_span() const { return cell_range(d0, d1); }

    GridPoint make_point(int64_t dc, int64_t cc) const {
        return x_driving ? GridPoint{dc, cc} : GridPoint{cc, dc};
    }
};

}  // namespace

std::vector<GridPoint> rasterize_cells(const TrimmedSegment& seg) {
    if (!(seg.t1 > seg.t0)) throw std::invalid_argument("degenerate segment");
    Raster r(seg);
    std::vector<GridPoint> cells;
    auto [dlo, dhi] = r.column_span();
    for (int64_t dc = dlo; dc <= dhi; ++dc) {
        auto [clo, chi] = r.column_cells(dc);
        for (int64_t cc = clo; cc <= chi; ++cc) cells.push_back(r.make_point(dc, cc));
    }
    // Order along the line.
    Vec2 dir = seg.parent.dir(), base = seg.parent.base();
    std::sort(cells.begin(), cells.end(), [&](GridPoint a, GridPoint b) {
        double sa = (Vec2{static_cast<double>(a.x), static_cast<double>(a.y)} - base).dot(dir);
        double sb = (Vec2{static_cast<double>(b.x), static_cast<double>(b.y)} - base).dot(dir);
        if (sa != sb) return sa < sb;
        return a < b;
    });
    return cells;
}

std::vector<RasterEdge> rasterize_highway(const TrimmedSegment& seg) {
    std::vector<GridPoint> cells = rasterize_cells(seg);
    std::vector<RasterEdge> edges;
    edges.reserve(cells.size());
    double w = seg.parent.weight();
    for (size_t i = 0; i + 1 < cells.size(); ++i)
        edges.push_back({EdgeKey::between(cells[i], cells[i + 1]), w});
    return edges;
}

bool raster_contains(const TrimmedSegment& seg, GridPoint v) {
    Raster r(seg);
    int64_t dc = r.x_driving ? v.x : v.y;
    int64_t cc = r.x_driving ? v.y : v.x;
    auto [dlo, dhi] = r.column_span();
    if (dc < dlo || dc > dhi) return false;
    auto [clo, chi] = r.column_cells(dc);
    return cc >= clo && cc <= chi;
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

struct HighwayIndex {
    GridRect window;
    std::vector<TrimmedSegment> segs;
    std::vector<double> weights;
    // Coarse buckets over the window; bucket -> segment ids whose dilated
    // bbox intersects it.
    int64_t bucket = 256;
    int64_t bx0 = 0, by0 = 0, bw = 0, bh = 0;
    std::vector<std::vector<int32_t>> buckets;

    explicit HighwayIndex(const LeveledSegments& ls, GridRect win) : window(win) {
        segs = ls.all();
        weights.reserve(segs.size());
        for (auto& s : segs) weights.push_back(s.parent.weight());
        bx0 = window.x0 / bucket - 2;
        by0 = window.y0 / bucket - 2;
        bw = (window.x1 / bucket + 2) - bx0 + 1;
        bh = (window.y1 / bucket + 2) - by0 + 1;
        buckets.resize(static_cast<size_t>(bw * bh));
        for (size_t i = 0; i < segs.size(); ++i) {
            Vec2 p0 = segs[i].p0(), p1 = segs[i].p1();
            double margin = 2.0;
            int64_t gx0 = ifloor((std::min(p0.x, p1.x) - margin) / bucket);
            int64_t gx1 = ifloor((std::max(p0.x, p1.x) + margin) / bucket);
            int64_t gy0 = ifloor((std::min(p0.y, p1.y) - margin) / bucket);
            int64_t gy1 = ifloor((std::max(p0.y, p1.y) + margin) / bucket);
            for (int64_t gy = std::max(gy0, by0); gy <= std::min(gy1, by0 + bh - 1); ++gy)
                for (int64_t gx = std::max(gx0, bx0); gx <= std::min(gx1, bx0 + bw - 1); ++gx) {
                    // Cheap reject: segment vs bucket box distance.
                    Rect box{static_cast<double>(gx) * bucket - margin,
                             static_cast<double>(gy) * bucket - margin,
                             static_cast<double>(gx + 1) * bucket + margin,
                             static_cast<double>(gy + 1) * bucket + margin};
                    if (!segment_meets_rect(p0, p1, box)) continue;
                    buckets[static_cast<size_t>((gy - by0) * bw + (gx - bx0))].push_back(
                        static_cast<int32_t>(i));
                }
        }
    }

    // Liang-Barsky segment/box overlap, robust at corners.
    static bool segment_meets_rect(Vec2 a, Vec2 b, const Rect& r) {
        double t0 = 0.0, t1 = 1.0;
        Vec2 d = b - a;
        auto clip = [&](double p, double q) {
            if (p == 0.0) return q >= 0.0;
            double t = q / p;
            if (p < 0.0) {
                if (t > t1) return false;
                if (t > t0) t0 = t;
            } else {
                if (t < t0) return false;
                if (t < t1) t1 = t;
            }
            return true;
        };
        return clip(-d.x, a.x - r.x0) && clip(d.x, r.x1 - a.x) && clip(-d.y, a.y - r.y0) &&
               clip(d.y, r.y1 - a.y) && t0 <= t1;
    }

    const std::vector<int32_t>& candidates(GridPoint p) const {
        static const std::vector<int32_t> empty;
        int64_t gx = p.x >= 0 ? p.x / bucket : (p.x - bucket + 1) / bucket;
        int64_t gy = p.y >= 0 ? p.y / bucket : (p.y - bucket + 1) / bucket;
        if (gx < bx0 || gx >= bx0 + bw || gy < by0 || gy >= by0 + bh) return empty;
        return buckets[static_cast<size_t>((gy - by0) * bw + (gx - bx0))];
    }

    // -1 if the vertex is on no highway; otherwise the segment id.
    // Throws if two highways touch the same vertex.
    int32_t owner(GridPoint p) const {
        int32_t found = -1;
        for (int32_t i : candidates(p)) {
            if (!raster_contains(segs[static_cast<size_t>(i)], p)) continue;
            if (found >= 0 && found != i)
                throw std::runtime_error("highway vertex collision: segments " +
                                         std::to_string(found) + " and " + std::to_string(i));
            found = i;
        }
        return found;
    }

    double edge_weight(const EdgeKey& e) const {
        int32_t a = owner(e.base);
        if (a < 0) return 2.0;
        int32_t b = owner(e.other());
        if (a == b) return weights[static_cast<size_t>(a)];
        return 2.0;
    }
};

}  // namespace

WeightGrid assemble_weights(const LeveledSegments& segments, GridRect window) {
    auto idx = std::make_shared<const HighwayIndex>(segments, window);
    return WeightGrid::lazy(
        window, [idx](const EdgeKey& e) { return idx->edge_weight(e); }, kInfWeight);
}

// ---------------------------------------------------------------------------
// Ring tiling

namespace {

struct Tile {
    int64_t side;          // n (vertices per side)
    int64_t ox, oy;        // lower-left vertex
};

// Block B_r spans [-H_r, H_r - 1]^2 with H_0 = 500, H_r = 1500 * 3^(r-1).
Tile tile_of(GridPoint p) {
    auto within = [&](int64_t H) { return p.x >= -H && p.x < H && p.y >= -H && p.y < H; };
    if (within(500)) return {1000, -500, -500};
    int64_t H = 1500;  // block half-side at ring r, starting r = 1
    int64_t side = 1000;
    for (int r = 1; r <= 16; ++r) {
        if (within(H)) {
            auto fdiv = [](int64_t a, int64_t b) {
                return a >= 0 ? a / b : -((-a + b - 1) / b);
            };
            int64_t half = side / 2;
            int64_t a = fdiv(p.x + half, side);
            int64_t b = fdiv(p.y + half, side);
            return {side, a * side - half, b * side - half};
        }
        side *= 3;
        H *= 3;
    }
    throw std::runtime_error("ring tiling: point beyond supported extent");
}

struct RingContext {
    mutable std::mutex mu;
    mutable std::map<int64_t, std::shared_ptr<const HighwayIndex>> by_inner_side;

    std::shared_ptr<const HighwayIndex> inner(int64_t m) const {
        {
            std::lock_guard<std::mutex> lock(mu);
            auto it = by_inner_side.find(m);
            if (it != by_inner_side.end()) return it->second;
        }
        // Build outside the lock; insertion is idempotent (construction is
        // deterministic, so concurrent builders produce identical indexes).
        LevelParams params = LevelParams::from_n(m);
        Rect win{0.0, 0.0, static_cast<double>(m - 1), static_cast<double>(m - 1)};
        LeveledSegments segs = trim_lines(params, win, false);
        auto idx = std::make_shared<const HighwayIndex>(segs, GridRect{0, 0, m - 1, m - 1});
        std::lock_guard<std::mutex> lock(mu);
        auto [it, inserted] = by_inner_side.emplace(m, idx);
        return it->second;
    }
};

}  // namespace

WeightGrid ring_tiling_weights(int64_t extent) {
    constexpr int64_t kMaxExtent = 2'000'000;
    if (extent < 1 || extent > kMaxExtent)
        throw std::invalid_argument("ring_tiling_weights: extent out of range");
    auto ctx = std::make_shared<RingContext>();
    GridRect window{-extent, -extent, extent, extent};
    auto oracle = [ctx](const EdgeKey& e) -> double {
        GridPoint u = e.base, v = e.other();
        Tile tu = tile_of(u);
        Tile tv = tile_of(v);
        if (tu.ox != tv.ox || tu.oy != tv.oy) return 2.0;  // tile-crossing edge
        int64_t lx = u.x - tu.ox, ly = u.y - tu.oy;
        int64_t mx = v.x - tu.ox, my = v.y - tu.oy;
        int64_t last = tu.side - 1;
        if (lx == 0 || ly == 0 || lx == last || ly == last) return 2.0;
        if (mx == 0 || my == 0 || mx == last || my == last) return 2.0;
        auto idx = ctx->inner(tu.side - 2);
        return idx->edge_weight({{lx - 1, ly - 1}, e.axis});
    };
    return WeightGrid::lazy(window, oracle, kInfWeight);
}

// ---------------------------------------------------------------------------
// Audits and verification

namespace {

double segment_segment_dist(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
    if (segments_properly_cross(a0, a1, b0, b1)) return 0.0;
    return std::min(std::min(point_segment_dist(a0, b0, b1), point_segment_dist(a1, b0, b1)),
                    std::min(point_segment_dist(b0, a0, a1), point_segment_dist(b1, a0, a1)));
}

}  // namespace

SeparationReport separation_audit(const LeveledSegments& segments) {
    SeparationReport rep;
    struct Entry {
        Vec2 p0, p1;
        int64_t k;
        double bx0, by0, bx1, by1;
    };
    std::vector<Entry> es;
    for (size_t li = 0; li < segments.by_level.size(); ++li) {
        for (auto& s : segments.by_level[li]) {
            Vec2 p0 = s.p0(), p1 = s.p1();
            es.push_back({p0, p1, segments.params.levels[li], std::min(p0.x, p1.x),
                          std::min(p0.y, p1.y), std::max(p0.x, p1.x), std::max(p0.y, p1.y)});
        }
    }
    double min_ratio = std::numeric_limits<double>::infinity();
    size_t n = es.size();
#pragma omp parallel
    {
        double local_min_dist = std::numeric_limits<double>::infinity();
        double local_req = 0.0;
        double local_ratio = std::numeric_limits<double>::infinity();
        int64_t local_pairs = 0;
#pragma omp for schedule(dynamic, 64)
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = i + 1; j < n; ++j) {
                double req = static_cast<double>(std::min(es[i].k, es[j].k));
                // Box-distance prune: cannot beat the running minimum.
                double gx = std::max({es[i].bx0 - es[j].bx1, es[j].bx0 - es[i].bx1, 0.0});
                double gy = std::max({es[i].by0 - es[j].by1, es[j].by0 - es[i].by1, 0.0});
                if (gx * gx + gy * gy >= req * req * 4.0) continue;
                double d = segment_segment_dist(es[i].p0, es[i].p1, es[j].p0, es[j].p1);
                ++local_pairs;
                if (d / req < local_ratio) {
                    local_ratio = d / req;
                    local_min_dist = d;
                    local_req = req;
                }
            }
        }
#pragma omp critical
        {
            rep.pairs_checked += local_pairs;
            if (local_ratio < min_ratio) {
                min_ratio = local_ratio;
                rep.min_distance = local_min_dist;
                rep.min_required = local_req;
            }
        }
    }
    if (min_ratio < std::numeric_limits<double>::infinity())
        rep.pass = min_ratio >= 1.0 - 1e-6;
    return rep;
}

double witness_path_weight(const LeveledSegments& segments, GridPoint u, GridPoint v) {
    Vec2 pu{static_cast<double>(u.x), static_cast<double>(u.y)};
    Vec2 pv{static_cast<double>(v.x), static_cast<double>(v.y)};
    auto l1w = [](Vec2 a, Vec2 b) {
        return 2.0 * (std::abs(a.x - b.x) + std::abs(a.y - b.y)) + 8.0;
    };
    double direct = l1w(pu, pv);
    if (segments.by_level.empty() || segments.by_level[0].empty()) return direct;

    int64_t k = segments.params.levels[0];
    double uv_angle = std::atan2(pv.y - pu.y, pv.x - pu.x);
    if (uv_angle < 0) uv_angle += kPi;

    // Best-aligned angle index, then the offset line nearest to u.
    int64_t best_j = 0;
    double best_da = std::numeric_limits<double>::infinity();
    for (int64_t j = 0; j < k; ++j) {
        double th = kPi * static_cast<double>(j) / static_cast<double>(k);
        double da = std::abs(th - uv_angle);
        da = std::min(da, kPi - da);
        if (da < best_da) {
            best_da = da;
            best_j = j;
        }
    }
    LineSpec proto{1, k, best_j, 0};
    double k4 = static_cast<double>(k) * k * k * k;
    int64_t t = static_cast<int64_t>(std::llround(pu.dot(proto.normal()) / k4));
    LineSpec star{1, k, best_j, t};

    // Surviving intervals of that line, ascending.
    std::vector<std::pair<double, double>> ivs;
    for (auto& s : segments.by_level[0])
        if (s.parent.angle_index == best_j && s.parent.offset_index == t)
            ivs.push_back({s.t0, s.t1});
    std::sort(ivs.begin(), ivs.end());
    if (ivs.empty()) return direct;

    Vec2 dir = star.dir(), base = star.base();
    double su = (pu - base).dot(dir);
    double sv = (pv - base).dot(dir);
    Vec2 from = pu, to = pv;
    if (su > sv) {
        std::swap(su, sv);
        std::swap(from, to);
    }

    double cost = 0.0;
    Vec2 cur = from;
    for (auto& [a, b] : ivs) {
        double lo = std::max(a, su), hi = std::min(b, sv);
        if (lo >= hi) continue;
        Vec2 entry = star.point_at(lo), exit = star.point_at(hi);
        cost += l1w(cur, entry);      // weight-2 walk to the highway
        cost += (hi - lo) + 3.0;      // along the highway (discrepancy <= 1, plus snap)
        cur = exit;
    }
    cost += l1w(cur, to);
    return std::min(cost, direct);
}

VerifyReport verify_guarantees(const WeightGrid& weights, const LeveledSegments& segments,
                               const std::vector<std::pair<GridPoint, GridPoint>>& pairs,
                               int64_t node_budget) {
    VerifyReport rep;
    rep.pairs.resize(pairs.size());
    double k1 = static_cast<double>(segments.params.levels.front());
    double scale_k4 = k1 * k1 * k1 * k1;

#pragma omp parallel for schedule(dynamic)
    for (size_t i = 0; i < pairs.size(); ++i) {
        auto [u, v] = pairs[i];
        PairCheck& pc = rep.pairs[i];
        pc.u = u;
        pc.v = v;
        pc.euclid = euclid(u, v);
        double margin = default_corridor_margin(u, v);
        int64_t m = static_cast<int64_t>(std::ceil(margin));
        int64_t nodes = (std::llabs(u.x - v.x) + 2 * m + 1) * (std::llabs(u.y - v.y) + 2 * m + 1);
        if (nodes <= node_budget) {
            auto d = shortest_dist(weights, u, v, margin);
            pc.dist = d ? *d : kInfWeight;
            pc.witness = false;
        } else {
            pc.dist = witness_path_weight(segments, u, v);
            pc.witness = true;
        }
        pc.additive_error = pc.dist - pc.euclid;
        pc.lower_bound_ok = pc.dist >= pc.euclid - 1.0 - 1e-9;
    }
    for (auto& pc : rep.pairs) {
        if (!pc.lower_bound_ok) ++rep.lower_bound_violations;
        double denom = pc.euclid / k1 + scale_k4;
        rep.fitted_c = std::max(rep.fitted_c, pc.additive_error / denom);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Export

void write_segments_csv(const std::string& path, const LeveledSegments& segments) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "level,j,t,x0,y0,x1,y1,weight\n");
    for (auto& lv : segments.by_level)
        for (auto& s : lv) {
            Vec2 p0 = s.p0(), p1 = s.p1();
            std::fprintf(f, "%d,%lld,%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.parent.level,
                         static_cast<long long>(s.parent.angle_index),
                         static_cast<long long>(s.parent.offset_index), p0.x, p0.y, p1.x, p1.y,
                         s.parent.weight());
        }
    std::fclose(f);
}

void write_segments_json(const std::string& path, const LeveledSegments& segments) {
    nlohmann::json j;
    j["n"] = segments.params.n;
    j["levels"] = segments.params.levels;
    auto& arr = j["segments"] = nlohmann::json::array();
    for (auto& lv : segments.by_level)
        for (auto& s : lv) {
            Vec2 p0 = s.p0(), p1 = s.p1();
            arr.push_back({{"level", s.parent.level},
                           {"j", s.parent.angle_index},
                           {"t", s.parent.offset_index},
                           {"x0", p0.x},
                           {"y0", p0.y},
                           {"x1", p1.x},
                           {"y1", p1.y},
                           {"weight", s.parent.weight()}});
        }
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string text = j.dump(2);
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

void write_verify_csv(const std::string& path, const VerifyReport& report) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "ux,uy,vx,vy,euclid,dist,additive_error\n");
    for (auto& p : report.pairs)
        std::fprintf(f, "%lld,%lld,%lld,%lld,%.17g,%.17g,%.17g\n", static_cast<long long>(p.u.x),
                     static_cast<long long>(p.u.y), static_cast<long long>(p.v.x),
                     static_cast<long long>(p.v.y), p.euclid, p.dist, p.additive_error);
    std::fclose(f);
}

}  // namespace gridmetric::highway
