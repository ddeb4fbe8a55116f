#include "gridmetric/pinwheel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "gridmetric/rng.hpp"
#include "gridmetric/shortest_path.hpp"

namespace gridmetric::pinwheel {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt5 = 2.2360679774997896;
}  // namespace

// ---------------------------------------------------------------------------
// Triangles and the substitution

double PinwheelTriangle::hyp_angle() const {
    Vec2 d = long_end - short_end;
    double a = std::atan2(d.y, d.x);
    if (a < 0.0) a += 2.0 * kPi;
    return a;
}

Vec2 PinwheelTriangle::centroid() const {
    return {(right_angle.x + short_end.x + long_end.x) / 3.0,
            (right_angle.y + short_end.y + long_end.y) / 3.0};
}

double PinwheelTriangle::area() const {
    return 0.5 * std::abs((short_end - right_angle).cross(long_end - right_angle));
}

bool PinwheelTriangle::contains(Vec2 p, double eps) const {
    return triangle_contains(right_angle, short_end, long_end, p, eps);
}

void PinwheelTriangle::validate() const {
    double s = short_len();
    if (!(s > 0.0)) throw std::invalid_argument("degenerate pinwheel triangle");
    double rel_long = std::abs(long_len() / s - 2.0);
    double rel_hyp = std::abs(hyp_len() / s - kSqrt5);
    if (rel_long > 1e-9 || rel_hyp > 1e-9)
        throw std::invalid_argument("pinwheel triangle violates 1:2:sqrt5 side ratios");
}

PinwheelTriangle PinwheelTriangle::from_vertices(Vec2 a, Vec2 b, Vec2 c, int level) {
    // The hypotenuse is the longest side; the right angle sits opposite it.
    double ab = (a - b).norm2(), bc = (b - c).norm2(), ca = (c - a).norm2();
    Vec2 r, p, q;
    if (ab >= bc && ab >= ca) {
        r = c;
        p = a;
        q = b;
    } else if (bc >= ab && bc >= ca) {
        r = a;
        p = b;
        q = c;
    } else {
        r = b;
        p = c;
        q = a;
    }
    PinwheelTriangle t;
    t.right_angle = r;
    if ((p - r).norm2() <= (q - r).norm2()) {
        t.short_end = p;
        t.long_end = q;
    } else {
        t.short_end = q;
        t.long_end = p;
    }
    t.level = level;
    t.chirality = (t.short_end - t.right_angle).cross(t.long_end - t.right_angle) > 0.0
                      ? Chirality::Left
                      : Chirality::Right;
    t.validate();
    return t;
}

std::array<PinwheelTriangle, 5> subdivide(const PinwheelTriangle& t) {
    t.validate();
    Vec2 A = t.right_angle, C = t.short_end, B = t.long_end;
    Vec2 D = midpoint(A, B);
    Vec2 E = C + (B - C) * (3.0 / 5.0);
    Vec2 F = C + (B - C) * (1.0 / 5.0);
    Vec2 G = midpoint(A, F);
    int lv = t.level - 1;
    return {PinwheelTriangle::from_vertices(A, C, F, lv),
            PinwheelTriangle::from_vertices(A, G, D, lv),
            PinwheelTriangle::from_vertices(G, F, D, lv),  // central child
            PinwheelTriangle::from_vertices(F, E, D, lv),
            PinwheelTriangle::from_vertices(E, B, D, lv)};
}

PinwheelTriangle central_parent(const PinwheelTriangle& t) {
    // The canonical order of the central child (G, F, D) matches the
    // canonical (right-angle, short-end, long-end) roles, so the parent
    // (A, C, B) is recoverable directly.
    Vec2 G = t.right_angle, F = t.short_end, D = t.long_end;
    Vec2 A = G * 2.0 - F;
    Vec2 B = D * 2.0 - A;
    Vec2 C = F + (G - D) * 0.5;
    return PinwheelTriangle::from_vertices(A, C, B, t.level + 1);
}

ExpandResult expand_to_cover(const PinwheelTriangle& seed, const Rect& window) {
    ExpandResult res{seed, 0};
    Vec2 corners[4] = {{window.x0, window.y0},
                       {window.x1, window.y0},
                       {window.x1, window.y1},
                       {window.x0, window.y1}};
    auto covered = [&] {
        for (auto& c : corners)
            if (!res.ancestor.contains(c)) return false;
        return true;
    };
    while (!covered()) {
        res.ancestor = central_parent(res.ancestor);
        if (++res.expansions > 96)
            throw std::runtime_error("expand_to_cover: window not covered after 96 expansions");
    }
    return res;
}

std::vector<double> angles_of_descendants(const PinwheelTriangle& t, int k) {
    if (k < 0) throw std::invalid_argument("angles_of_descendants: k < 0");
    if (k > 10) throw std::invalid_argument("angles_of_descendants: k > 10 (5^k enumeration)");
    std::vector<double> out;
    struct Frame {
        PinwheelTriangle tri;
        int depth;
    };
    std::vector<Frame> stack{{t, 0}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.depth == k) {
            out.push_back(f.tri.hyp_angle());
            continue;
        }
        for (auto& c : subdivide(f.tri)) stack.push_back({c, f.depth + 1});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Plane graph of a window

namespace {

int64_t quantize(double v) { return static_cast<int64_t>(std::llround(v * 1e4)); }

struct QPoint {
    int64_t x, y;
    bool operator==(const QPoint&) const = default;
};
struct QPointHash {
    size_t operator()(const QPoint& p) const {
        uint64_t h = static_cast<uint64_t>(p.x) * 0x9e3779b97f4a7c15ULL;
        return h ^ (static_cast<uint64_t>(p.y) + (h << 6) + (h >> 2));
    }
};

}  // namespace

PinwheelGraph build_pinwheel_graph(const Rect& window, double atomic_scale,
                                   int64_t triangle_limit) {
    if (!(atomic_scale > 0.0)) throw std::invalid_argument("atomic_scale must be positive");
    PinwheelGraph g;
    g.window = window;
    g.atomic_scale = atomic_scale;

    PinwheelTriangle seed = PinwheelTriangle::from_vertices(
        {0.0, 0.0}, {0.0, atomic_scale}, {2.0 * atomic_scale, 0.0}, 0);
    ExpandResult top = expand_to_cover(seed, window);

    // Depth-first descent, pruning subtrees that miss the window.
    std::vector<PinwheelTriangle> stack{top.ancestor};
    while (!stack.empty()) {
        PinwheelTriangle t = stack.back();
        stack.pop_back();
        if (!triangle_intersects_rect(t.right_angle, t.short_end, t.long_end, window)) continue;
        if (t.level == 0) {
            g.triangles.push_back(t);
            if (static_cast<int64_t>(g.triangles.size()) > triangle_limit)
                throw std::runtime_error("build_pinwheel_graph: triangle limit exceeded");
            continue;
        }
        for (auto& c : subdivide(t)) stack.push_back(c);
    }

    // Deterministic triangle order regardless of traversal details.
    std::sort(g.triangles.begin(), g.triangles.end(),
              [](const PinwheelTriangle& a, const PinwheelTriangle& b) {
                  Vec2 ca = a.centroid(), cb = b.centroid();
                  auto ka = std::make_tuple(quantize(ca.y), quantize(ca.x));
                  auto kb = std::make_tuple(quantize(cb.y), quantize(cb.x));
                  return ka < kb;
              });

    std::unordered_map<QPoint, int32_t, QPointHash> vid;
    auto vertex_id = [&](Vec2 p) {
        QPoint q{quantize(p.x), quantize(p.y)};
        auto it = vid.find(q);
        if (it != vid.end()) return it->second;
        int32_t id = static_cast<int32_t>(g.vertices.size());
        g.vertices.push_back(p);
        vid.emplace(q, id);
        return id;
    };

    std::unordered_set<uint64_t> edge_seen;
    auto add_edge = [&](int32_t a, int32_t b) {
        if (a > b) std::swap(a, b);
        uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
                       static_cast<uint32_t>(b);
        if (edge_seen.insert(key).second) g.edges.push_back({a, b});
    };

    for (auto& t : g.triangles) {
        int32_t r = vertex_id(t.right_angle);
        int32_t s = vertex_id(t.short_end);
        int32_t l = vertex_id(t.long_end);
        add_edge(r, s);
        add_edge(r, l);
        add_edge(s, l);
    }
    return g;
}

double graph_dist(const PinwheelGraph& g, int32_t src, int32_t dst) {
    std::vector<std::vector<std::pair<int32_t, double>>> adj(g.vertices.size());
    for (size_t e = 0; e < g.edges.size(); ++e) {
        auto [a, b] = g.edges[e];
        double w = g.edge_length(e);
        adj[static_cast<size_t>(a)].push_back({b, w});
        adj[static_cast<size_t>(b)].push_back({a, w});
    }
    std::vector<double> dist(g.vertices.size(), kInfWeight);
    using Entry = std::pair<double, int32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
    dist[static_cast<size_t>(src)] = 0.0;
    heap.push({0.0, src});
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[static_cast<size_t>(v)]) continue;
        if (v == dst) return d;
        for (auto& [u, w] : adj[static_cast<size_t>(v)]) {
            double nd = d + w;
            if (nd < dist[static_cast<size_t>(u)]) {
                dist[static_cast<size_t>(u)] = nd;
                heap.push({nd, u});
            }
        }
    }
    return dist[static_cast<size_t>(dst)];
}

// ---------------------------------------------------------------------------
// Embedding

namespace {

// Forced step axis at either end of a staircase: deflects the departure
// (or arrival) of a path whose preferred port is already congested.
enum class Force : uint8_t { None, X, Y };

// Monotone staircase from a to b tracking a (possibly offset) polyline.
// Returns an empty vector when a forced step is monotonically infeasible.
std::vector<GridPoint> staircase(GridPoint a, GridPoint b, Vec2 pa, Vec2 pb, double offset,
                                 Force first = Force::None, Force last = Force::None) {
    std::vector<Vec2> poly;
    Vec2 d = pb - pa;
    double len = d.norm();
    if (offset == 0.0 || len < 8.0) {
        poly = {pa, pb};
    } else {
        Vec2 t = d * (1.0 / len);
        Vec2 n{-t.y, t.x};
        double ramp = std::min(3.0, len / 4.0);
        poly = {pa, pa + t * ramp + n * offset, pb - t * ramp + n * offset, pb};
    }
    auto poly_dist = [&](Vec2 p) {
        double best = kInfWeight;
        for (size_t i = 0; i + 1 < poly.size(); ++i)
            best = std::min(best, point_segment_dist(p, poly[i], poly[i + 1]));
        return best;
    };

    int64_t sx = b.x > a.x ? 1 : -1, sy = b.y > a.y ? 1 : -1;
    int64_t need_x = std::llabs(b.x - a.x), need_y = std::llabs(b.y - a.y);
    if (first == Force::X && need_x < 1) return {};
    if (first == Force::Y && need_y < 1) return {};
    if (last == Force::X && need_x < (first == Force::X ? 2 : 1)) return {};
    if (last == Force::Y && need_y < (first == Force::Y ? 2 : 1)) return {};

    GridPoint start = a, goal = b;
    if (first == Force::X) start = {a.x + sx, a.y};
    if (first == Force::Y) start = {a.x, a.y + sy};
    if (last == Force::X) goal = {b.x - sx, b.y};
    if (last == Force::Y) goal = {b.x, b.y - sy};

    std::vector<GridPoint> path;
    path.reserve(static_cast<size_t>(l1(a, b)) + 1);
    path.push_back(a);
    if (first != Force::None) path.push_back(start);
    bool prefer_x = std::abs(d.x) >= std::abs(d.y);
    GridPoint cur = start;
    while (cur != goal) {
        GridPoint nx{cur.x + sx, cur.y}, ny{cur.x, cur.y + sy};
        GridPoint step;
        if (cur.x == goal.x)
            step = ny;
        else if (cur.y == goal.y)
            step = nx;
        else {
            double dx = poly_dist({static_cast<double>(nx.x), static_cast<double>(nx.y)});
            double dy = poly_dist({static_cast<double>(ny.x), static_cast<double>(ny.y)});
            if (dx < dy - 1e-12)
                step = nx;
            else if (dy < dx - 1e-12)
                step = ny;
            else
                step = prefer_x ? nx : ny;
        }
        path.push_back(step);
        cur = step;
    }
    if (last != Force::None) path.push_back(b);
    return path;
}

// Departure ports: 0 = +x, 1 = +y, 2 = -x, 3 = -y. Each tiling vertex
// hands out at most two slots per port (a grid edge can serve exactly two
// paths as their shared weight-1 prefix), so edge-ends whose angle sector
// is congested deflect to an adjacent feasible port.
struct PortPlan {
    std::vector<Force> at_first;   // per edge: forced axis at edges[e].first
    std::vector<Force> at_second;  // per edge: forced axis at edges[e].second
};

PortPlan assign_ports(const PinwheelGraph& g) {
    PortPlan plan;
    plan.at_first.assign(g.edges.size(), Force::None);
    plan.at_second.assign(g.edges.size(), Force::None);

    struct End {
        double angle;
        int32_t edge;
        bool at_first;
        double dx, dy;
    };
    std::vector<std::vector<End>> ends(g.vertices.size());
    for (size_t e = 0; e < g.edges.size(); ++e) {
        auto [a, b] = g.edges[e];
        Vec2 d = g.vertices[static_cast<size_t>(b)] - g.vertices[static_cast<size_t>(a)];
        ends[static_cast<size_t>(a)].push_back(
            {std::atan2(d.y, d.x), static_cast<int32_t>(e), true, d.x, d.y});
        ends[static_cast<size_t>(b)].push_back(
            {std::atan2(-d.y, -d.x), static_cast<int32_t>(e), false, -d.x, -d.y});
    }

    auto feasible = [](int port, double dx, double dy) {
        switch (port) {
            case 0: return dx > 0.0;
            case 1: return dy > 0.0;
            case 2: return dx < 0.0;
            default: return dy < 0.0;
        }
    };
    constexpr double kQuarter = kPi / 2.0;
    for (auto& list : ends) {
        std::sort(list.begin(), list.end(), [](const End& a, const End& b) {
            if (a.angle != b.angle) return a.angle < b.angle;
            return a.edge < b.edge;
        });
        int counts[4] = {0, 0, 0, 0};
        for (auto& end : list) {
            double a = end.angle < 0.0 ? end.angle + 2.0 * kPi : end.angle;
            int natural = static_cast<int>(std::floor((a + kQuarter / 2.0) / kQuarter)) % 4;
            // Preference order: natural sector, then the nearer neighbor,
            // the farther neighbor, the opposite sector.
            double frac = (a + kQuarter / 2.0) / kQuarter -
                          std::floor((a + kQuarter / 2.0) / kQuarter);
            int near_step = frac >= 0.5 ? 1 : 3;
            int order[4] = {natural, (natural + near_step) % 4, (natural + 4 - near_step) % 4,
                            (natural + 2) % 4};
            for (int port : order) {
                if (counts[port] >= 2 || !feasible(port, end.dx, end.dy)) continue;
                ++counts[port];
                Force f = (port == 0 || port == 2) ? Force::X : Force::Y;
                if (end.at_first)
                    plan.at_first[static_cast<size_t>(end.edge)] = f;
                else
                    plan.at_second[static_cast<size_t>(end.edge)] = f;
                break;
            }
            // No feasible port: leave unforced and let the ladder search.
        }
    }
    return plan;
}

struct EdgeUse {
    int32_t e1 = -1, i1 = -1;  // owner path and grid-edge index within it
    int32_t e2 = -1, i2 = -1;  // second user (shared prefix edge)
};

struct Router {
    const PinwheelGraph& g;
    const std::vector<GridPoint>& phi;
    std::vector<std::vector<GridPoint>> paths;
    std::unordered_map<EdgeKey, EdgeUse, EdgeKeyHash> edge_use;
    std::unordered_map<GridPoint, std::vector<std::pair<int32_t, int32_t>>, GridPointHash>
        vertex_use;  // (path id, vertex index)

    Router(const PinwheelGraph& g_, const std::vector<GridPoint>& phi_)
        : g(g_), phi(phi_), paths(g_.edges.size()) {}

    // Shared tiling vertex of edges e and f, or -1.
    int32_t shared_vertex(int32_t e, int32_t f) const {
        auto [a, b] = g.edges[static_cast<size_t>(e)];
        auto [c, d] = g.edges[static_cast<size_t>(f)];
        if (a == c || a == d) return a;
        if (b == c || b == d) return b;
        return -1;
    }

    // Index of a path position counted from the end at tiling vertex x.
    static int64_t from_end(int64_t idx, int64_t n, bool x_at_front) {
        return x_at_front ? idx : n - idx;
    }

    bool candidate_ok(int32_t e, const std::vector<GridPoint>& path, int32_t* conflict) const {
        auto [u, v] = g.edges[static_cast<size_t>(e)];
        int64_t L = static_cast<int64_t>(path.size());
        for (int64_t i = 0; i + 1 < L; ++i) {
            EdgeKey k = EdgeKey::between(path[static_cast<size_t>(i)],
                                         path[static_cast<size_t>(i + 1)]);
            auto it = edge_use.find(k);
            if (it == edge_use.end()) continue;
            const EdgeUse& use = it->second;
            if (use.e2 >= 0) {  // already shared by two paths
                *conflict = use.e1;
                return false;
            }
            int32_t x = shared_vertex(e, use.e1);
            if (x < 0) {
                *conflict = use.e1;
                return false;
            }
            auto [a1, b1] = g.edges[static_cast<size_t>(use.e1)];
            int64_t L1 = static_cast<int64_t>(paths[static_cast<size_t>(use.e1)].size());
            int64_t mine = from_end(i, L - 2, x == u);
            int64_t theirs = from_end(use.i1, L1 - 2, x == a1);
            if (mine > 1 || theirs > 1) {
                *conflict = use.e1;
                return false;
            }
        }
        for (int64_t i = 0; i < L; ++i) {
            auto it = vertex_use.find(path[static_cast<size_t>(i)]);
            if (it == vertex_use.end()) continue;
            for (auto& [f, j] : it->second) {
                int32_t x = shared_vertex(e, f);
                if (x < 0) {
                    *conflict = f;
                    return false;
                }
                auto [a1, b1] = g.edges[static_cast<size_t>(f)];
                int64_t Lf = static_cast<int64_t>(paths[static_cast<size_t>(f)].size());
                int64_t mine = from_end(i, L - 1, x == u);
                int64_t theirs = from_end(j, Lf - 1, x == a1);
                if (mine > 2 || theirs > 2) {
                    *conflict = f;
                    return false;
                }
            }
        }
        return true;
    }

    void commit(int32_t e, std::vector<GridPoint> path) {
        int64_t L = static_cast<int64_t>(path.size());
        for (int64_t i = 0; i + 1 < L; ++i) {
            EdgeKey k = EdgeKey::between(path[static_cast<size_t>(i)],
                                         path[static_cast<size_t>(i + 1)]);
            EdgeUse& use = edge_use[k];
            if (use.e1 < 0) {
                use.e1 = e;
                use.i1 = static_cast<int32_t>(i);
            } else {
                use.e2 = e;
                use.i2 = static_cast<int32_t>(i);
            }
        }
        for (int64_t i = 0; i < L; ++i)
            vertex_use[path[static_cast<size_t>(i)]].push_back({e, static_cast<int32_t>(i)});
        paths[static_cast<size_t>(e)] = std::move(path);
    }
};

}  // namespace

GridEmbedding embed_into_grid(const PinwheelGraph& g) {
    if (g.atomic_scale < 25.0)
        throw std::invalid_argument("embed_into_grid: atomic_scale must be >= 25");

    GridEmbedding emb;
    size_t nv = g.vertices.size();
    emb.vertex_map.resize(nv);

    // Snap vertices to integer points, nearest first; collisions bump to
    // the closest free integer point (tiling vertices are >= 25 apart
    // except across fault lines, where near-coincidences happen).
    std::vector<size_t> order(nv);
    for (size_t i = 0; i < nv; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        auto ka = std::make_pair(quantize(g.vertices[a].y), quantize(g.vertices[a].x));
        auto kb = std::make_pair(quantize(g.vertices[b].y), quantize(g.vertices[b].x));
        return ka < kb;
    });
    std::unordered_set<GridPoint, GridPointHash> taken;
    for (size_t vi : order) {
        Vec2 p = g.vertices[vi];
        GridPoint best{std::llround(p.x), std::llround(p.y)};
        if (taken.count(best)) {
            bool placed = false;
            for (int64_t ring = 1; ring <= 3 && !placed; ++ring) {
                GridPoint pick{};
                double pick_d = kInfWeight;
                for (int64_t dy = -ring; dy <= ring; ++dy)
                    for (int64_t dx = -ring; dx <= ring; ++dx) {
                        if (std::max(std::llabs(dx), std::llabs(dy)) != ring) continue;
                        GridPoint c{best.x + dx, best.y + dy};
                        if (taken.count(c)) continue;
                        double d = std::hypot(static_cast<double>(c.x) - p.x,
                                              static_cast<double>(c.y) - p.y);
                        if (d < pick_d) {
                            pick_d = d;
                            pick = c;
                        }
                    }
                if (pick_d < kInfWeight) {
                    best = pick;
                    placed = true;
                }
            }
            if (!placed) throw std::runtime_error("embed_into_grid: vertex snapping failed");
        }
        taken.insert(best);
        emb.vertex_map[vi] = best;
    }

    // Route edges in lexicographic endpoint order.
    std::vector<int32_t> edge_order(g.edges.size());
    for (size_t i = 0; i < edge_order.size(); ++i) edge_order[i] = static_cast<int32_t>(i);
    auto edge_key = [&](int32_t e) {
        auto [a, b] = g.edges[static_cast<size_t>(e)];
        auto ka = std::make_pair(quantize(g.vertices[static_cast<size_t>(a)].y),
                                 quantize(g.vertices[static_cast<size_t>(a)].x));
        auto kb = std::make_pair(quantize(g.vertices[static_cast<size_t>(b)].y),
                                 quantize(g.vertices[static_cast<size_t>(b)].x));
        return ka < kb ? std::make_pair(ka, kb) : std::make_pair(kb, ka);
    };
    std::sort(edge_order.begin(), edge_order.end(),
              [&](int32_t a, int32_t b) { return edge_key(a) < edge_key(b); });

    Router router(g, emb.vertex_map);
    PortPlan ports = assign_ports(g);
    emb.offset_used.assign(g.edges.size(), 0);
    constexpr double kOffsets[] = {0.0, 1.0, -1.0, 2.0, -2.0, 3.0, -3.0};
    constexpr Force kForces[] = {Force::None, Force::X, Force::Y};
    for (int32_t e : edge_order) {
        auto [u, v] = g.edges[static_cast<size_t>(e)];
        GridPoint a = emb.vertex_map[static_cast<size_t>(u)];
        GridPoint b = emb.vertex_map[static_cast<size_t>(v)];
        Vec2 pa = g.vertices[static_cast<size_t>(u)], pb = g.vertices[static_cast<size_t>(v)];
        Force pf = ports.at_first[static_cast<size_t>(e)];
        Force pl = ports.at_second[static_cast<size_t>(e)];
        bool routed = false;
        int32_t conflict = -1;
        for (double off : kOffsets) {
            // Assigned ports first, then the remaining force combinations.
            for (Force ff : {pf, kForces[0], kForces[1], kForces[2]}) {
                for (Force lf : {pl, kForces[0], kForces[1], kForces[2]}) {
                    std::vector<GridPoint> path = staircase(a, b, pa, pb, off, ff, lf);
                    if (path.empty()) continue;
                    if (!router.candidate_ok(e, path, &conflict)) continue;
                    router.commit(e, std::move(path));
                    emb.offset_used[static_cast<size_t>(e)] = static_cast<int>(off);
                    routed = true;
                    break;
                }
                if (routed) break;
            }
            if (routed) break;
        }
        if (!routed)
            throw std::runtime_error("embed_into_grid: routing failure between tiling edges " +
                                     std::to_string(e) + " and " + std::to_string(conflict));
    }
    emb.path_map = std::move(router.paths);

    // Weight assignment: shared prefix edges weigh 1; the remaining edges
    // of each path share one value making the path sum exactly the
    // Euclidean length of the tiling edge.
    int64_t x0 = std::numeric_limits<int64_t>::max(), y0 = x0;
    int64_t x1 = std::numeric_limits<int64_t>::min(), y1 = x1;
    for (auto& path : emb.path_map)
        for (auto& p : path) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
    emb.grid_window = GridRect{x0 - 2, y0 - 2, x1 + 2, y1 + 2};
    emb.weights = WeightGrid::dense(emb.grid_window, 10.0);

    emb.interior_weight.assign(g.edges.size(), 0.0);
    emb.shared_edge_count.assign(g.edges.size(), 0);
    for (size_t e = 0; e < g.edges.size(); ++e) {
        auto& path = emb.path_map[e];
        int shared = 0;
        for (size_t i = 0; i + 1 < path.size(); ++i) {
            EdgeKey k = EdgeKey::between(path[i], path[i + 1]);
            if (router.edge_use[k].e2 >= 0) ++shared;
        }
        emb.shared_edge_count[e] = shared;
        double target = g.edge_length(e);
        int64_t n = static_cast<int64_t>(path.size()) - 1;
        if (n <= shared)
            throw std::runtime_error("embed_into_grid: path too short for weight calibration");
        double w = (target - static_cast<double>(shared)) / static_cast<double>(n - shared);
        emb.interior_weight[e] = w;
        for (size_t i = 0; i + 1 < path.size(); ++i) {
            EdgeKey k = EdgeKey::between(path[i], path[i + 1]);
            emb.weights.set(k, router.edge_use[k].e2 >= 0 ? 1.0 : w);
        }
    }
    return emb;
}

EmbeddingAudit audit_embedding(const PinwheelGraph& g, const GridEmbedding& emb,
                               uint64_t sample_seed, int64_t subpath_cap) {
    EmbeddingAudit audit;
    std::unordered_map<EdgeKey, int, EdgeKeyHash> usage;

    for (size_t e = 0; e < g.edges.size(); ++e) {
        auto& path = emb.path_map[e];
        auto [u, v] = g.edges[e];
        if (path.front() != emb.vertex_map[static_cast<size_t>(u)] ||
            path.back() != emb.vertex_map[static_cast<size_t>(v)])
            audit.disjointness_ok = false;

        // Prefix sums of path weights.
        std::vector<double> pre(path.size(), 0.0);
        for (size_t i = 0; i + 1 < path.size(); ++i) {
            EdgeKey k = EdgeKey::between(path[i], path[i + 1]);
            pre[i + 1] = pre[i] + emb.weights.weight(k);
            ++usage[k];
        }
        double target = g.edge_length(e);
        audit.max_path_sum_rel_err =
            std::max(audit.max_path_sum_rel_err, std::abs(pre.back() - target) / target);
        audit.min_interior_weight = std::min(audit.min_interior_weight, emb.interior_weight[e]);
        audit.max_interior_weight = std::max(audit.max_interior_weight, emb.interior_weight[e]);

        auto subpath_dev = [&](size_t i, size_t j) {
            double w = pre[j] - pre[i];
            double d = euclid(path[i], path[j]);
            return std::abs(w - d);
        };
        int64_t L = static_cast<int64_t>(path.size());
        if (L <= subpath_cap) {
            for (size_t i = 0; i < path.size(); ++i)
                for (size_t j = i + 1; j < path.size(); ++j)
                    audit.max_subpath_deviation =
                        std::max(audit.max_subpath_deviation, subpath_dev(i, j));
        } else {
            RngStream s = RngStream(sample_seed).derive(e);
            for (int r = 0; r < 4000; ++r) {
                size_t i = static_cast<size_t>(s.bits(2 * r) % static_cast<uint64_t>(L));
                size_t j = static_cast<size_t>(s.bits(2 * r + 1) % static_cast<uint64_t>(L));
                if (i == j) continue;
                if (i > j) std::swap(i, j);
                audit.max_subpath_deviation =
                    std::max(audit.max_subpath_deviation, subpath_dev(i, j));
            }
        }
    }

    // Shared edges: at most two users anywhere, and the shared run at a
    // common endpoint is at most 2 grid edges long.
    for (auto& [k, count] : usage) {
        if (count > 2) audit.disjointness_ok = false;
    }
    for (size_t e = 0; e < g.edges.size(); ++e) {
        auto& path = emb.path_map[e];
        int run = 0;
        for (size_t i = 0; i + 1 < path.size(); ++i)
            if (usage[EdgeKey::between(path[i], path[i + 1])] == 2) ++run;
        audit.max_shared_prefix = std::max(audit.max_shared_prefix, emb.shared_edge_count[e]);
        if (run != emb.shared_edge_count[e]) audit.disjointness_ok = false;
        // Shared edges must sit within the first two positions from an end.
        for (size_t i = 0; i + 1 < path.size(); ++i) {
            EdgeKey k = EdgeKey::between(path[i], path[i + 1]);
            if (usage[k] == 2 && i > 1 && i + 3 < path.size()) audit.disjointness_ok = false;
        }
    }

    // Off-path spot check: untouched edges keep weight 10.
    RngStream s = RngStream(sample_seed).derive(0xabcd);
    const GridRect& w = emb.grid_window;
    for (int r = 0; r < 20000; ++r) {
        int64_t x = w.x0 + static_cast<int64_t>(s.bits(3 * r) % static_cast<uint64_t>(w.width() - 1));
        int64_t y =
            w.y0 + static_cast<int64_t>(s.bits(3 * r + 1) % static_cast<uint64_t>(w.height() - 1));
        Axis axis = (s.bits(3 * r + 2) & 1) ? Axis::Vertical : Axis::Horizontal;
        EdgeKey k{{x, y}, axis};
        if (usage.count(k)) continue;
        ++audit.off_path_samples;
        if (emb.weights.weight(k) != 10.0) audit.off_path_all_ten = false;
    }
    return audit;
}

StretchTable measure_stretch(const WeightGrid& weights,
                             const std::vector<std::pair<GridPoint, GridPoint>>& pairs,
                             int bin_count, double margin_factor) {
    StretchTable table;
    table.rows.resize(pairs.size());
    table.min_additive_margin = kInfWeight;

#pragma omp parallel for schedule(dynamic)
    for (size_t i = 0; i < pairs.size(); ++i) {
        auto [u, v] = pairs[i];
        StretchRow& row = table.rows[i];
        row.u = u;
        row.v = v;
        row.euclid = euclid(u, v);
        double margin = std::max(32.0, margin_factor * row.euclid);
        auto d = shortest_dist(weights, u, v, margin);
        if (!d) {
            row.reachable = false;
            continue;
        }
        row.dist = *d;
        row.stretch = row.euclid > 0.0 ? row.dist / row.euclid : 1.0;
    }

    double dmin = kInfWeight, dmax = 0.0;
    for (auto& r : table.rows) {
        if (!r.reachable) continue;
        dmin = std::min(dmin, r.euclid);
        dmax = std::max(dmax, r.euclid);
        table.min_additive_margin = std::min(table.min_additive_margin, r.dist - r.euclid);
    }
    if (!(dmax > dmin)) dmax = dmin + 1.0;
    table.bins.resize(static_cast<size_t>(bin_count));
    double log_lo = std::log(dmin), log_hi = std::log(dmax * (1.0 + 1e-12));
    for (int b = 0; b < bin_count; ++b) {
        table.bins[static_cast<size_t>(b)].d_lo = std::exp(log_lo + (log_hi - log_lo) * b / bin_count);
        table.bins[static_cast<size_t>(b)].d_hi =
            std::exp(log_lo + (log_hi - log_lo) * (b + 1) / bin_count);
    }
    for (auto& r : table.rows) {
        if (!r.reachable) continue;
        int b = std::min(bin_count - 1,
                         static_cast<int>((std::log(r.euclid) - log_lo) / (log_hi - log_lo) *
                                          bin_count));
        StretchBin& bin = table.bins[static_cast<size_t>(b)];
        bin.max_stretch = std::max(bin.max_stretch, r.stretch);
        bin.mean_stretch += r.stretch;
        ++bin.count;
    }
    for (auto& b : table.bins)
        if (b.count > 0) b.mean_stretch /= static_cast<double>(b.count);
    return table;
}

// ---------------------------------------------------------------------------
// Export

void write_tiling_json(const std::string& path, const PinwheelGraph& g) {
    nlohmann::json j;
    j["atomic_scale"] = g.atomic_scale;
    auto& tri = j["triangles"] = nlohmann::json::array();
    for (auto& t : g.triangles)
        tri.push_back({{"right_angle", {t.right_angle.x, t.right_angle.y}},
                       {"short_end", {t.short_end.x, t.short_end.y}},
                       {"long_end", {t.long_end.x, t.long_end.y}},
                       {"level", t.level},
                       {"chirality",
                        t.chirality == PinwheelTriangle::Chirality::Left ? "left" : "right"}});
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string text = j.dump();
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

void write_embedding_json(const std::string& path, const PinwheelGraph& g,
                          const GridEmbedding& emb) {
    nlohmann::json j;
    auto& vm = j["vertex_map"] = nlohmann::json::array();
    for (size_t i = 0; i < g.vertices.size(); ++i)
        vm.push_back({{"x", g.vertices[i].x},
                      {"y", g.vertices[i].y},
                      {"gx", emb.vertex_map[i].x},
                      {"gy", emb.vertex_map[i].y}});
    auto& pm = j["path_map"] = nlohmann::json::array();
    for (size_t e = 0; e < g.edges.size(); ++e) {
        nlohmann::json pj;
        pj["edge"] = {g.edges[e].first, g.edges[e].second};
        pj["interior_weight"] = emb.interior_weight[e];
        auto& pts = pj["path"] = nlohmann::json::array();
        for (auto& p : emb.path_map[e]) pts.push_back({p.x, p.y});
        pm.push_back(std::move(pj));
    }
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string text = j.dump();
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

void write_stretch_csv(const std::string& path, const StretchTable& table) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "d_bin,max_stretch,mean_stretch,count\n");
    for (auto& b : table.bins)
        std::fprintf(f, "%.17g,%.17g,%.17g,%lld\n", b.d_hi, b.max_stretch, b.mean_stretch,
                     static_cast<long long>(b.count));
    std::fclose(f);
}

}  // namespace gridmetric::pinwheel
