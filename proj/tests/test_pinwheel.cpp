#include <doctest.h>

#include <cmath>
#include <set>

#include "gridmetric/pinwheel.hpp"
#include "gridmetric/shortest_path.hpp"

using namespace gridmetric;
using namespace gridmetric::pinwheel;

namespace {
const double kGamma = std::atan(0.5);

// Exact doubled area for integer-coordinate triangles.
int64_t doubled_area(Vec2 a, Vec2 b, Vec2 c) {
    auto X = [](double v) { return static_cast<int64_t>(std::llround(v)); };
    return std::llabs((X(b.x) - X(a.x)) * (X(c.y) - X(a.y)) -
                      (X(b.y) - X(a.y)) * (X(c.x) - X(a.x)));
}

// Strict interior test with exact integer arithmetic on 3x-scaled points.
bool strictly_inside(Vec2 p3, const PinwheelTriangle& t) {
    auto X = [](double v) { return static_cast<int64_t>(std::llround(v)); };
    int64_t px = X(p3.x), py = X(p3.y);
    int64_t ax = 3 * X(t.right_angle.x), ay = 3 * X(t.right_angle.y);
    int64_t bx = 3 * X(t.short_end.x), by = 3 * X(t.short_end.y);
    int64_t cx = 3 * X(t.long_end.x), cy = 3 * X(t.long_end.y);
    auto side = [&](int64_t x1, int64_t y1, int64_t x2, int64_t y2) {
        return (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1);
    };
    int64_t d1 = side(ax, ay, bx, by), d2 = side(bx, by, cx, cy), d3 = side(cx, cy, ax, ay);
    return (d1 > 0 && d2 > 0 && d3 > 0) || (d1 < 0 && d2 < 0 && d3 < 0);
}
}  // namespace

TEST_CASE("subdivision: figure coordinates of the central child") {
    // Parent A=(0,0), B=(2,0), C=(0,1): right angle at A, short end C.
    auto t = PinwheelTriangle::from_vertices({0, 0}, {2, 0}, {0, 1}, 1);
    Vec2 want_r{0, 0}, want_s{0, 1}, want_l{2, 0};
    CHECK(t.right_angle == want_r);
    CHECK(t.short_end == want_s);
    CHECK(t.long_end == want_l);

    auto kids = subdivide(t);
    const PinwheelTriangle& central = kids[2];
    CHECK(central.right_angle.x == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(central.right_angle.y == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(central.short_end.x == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(central.short_end.y == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(central.long_end.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(central.long_end.y == doctest::Approx(0.0).epsilon(1e-12));

    // Child side lengths for a unit-level parent: {1/sqrt5, 2/sqrt5, 1}.
    for (auto& k : kids) {
        CHECK(k.short_len() == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
        CHECK(k.long_len() == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
        CHECK(k.hyp_len() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(k.level == 0);
    }

    // Areas sum exactly to the parent's.
    double sum = 0.0;
    for (auto& k : kids) sum += k.area();
    CHECK(sum == doctest::Approx(t.area()).epsilon(1e-12));
    CHECK_THROWS(PinwheelTriangle::from_vertices({0, 0}, {1, 0}, {0, 1}, 0));
}

TEST_CASE("subdivision partition is exact on integer coordinates") {
    // Scaled parent with integer split points: A=(0,0), C=(0,10), B=(20,0).
    auto t = PinwheelTriangle::from_vertices({0, 0}, {0, 10}, {20, 0}, 1);
    auto kids = subdivide(t);
    int64_t parent2 = doubled_area(t.right_angle, t.short_end, t.long_end);
    int64_t sum2 = 0;
    for (auto& k : kids) sum2 += doubled_area(k.right_angle, k.short_end, k.long_end);
    CHECK(sum2 == parent2);

    // Pairwise interior-disjoint: each child's 3x centroid (integer) lies
    // strictly inside no other child.
    for (size_t i = 0; i < 5; ++i) {
        Vec2 c3 = {kids[i].right_angle.x + kids[i].short_end.x + kids[i].long_end.x,
                   kids[i].right_angle.y + kids[i].short_end.y + kids[i].long_end.y};
        int inside = 0;
        for (size_t j = 0; j < 5; ++j) {
            PinwheelTriangle tj = kids[j];
            tj.right_angle = tj.right_angle;  // integer coords by construction
            if (strictly_inside(c3, tj)) ++inside;
        }
        CHECK(inside == 1);  // only its own triangle
    }
}

TEST_CASE("central parent inverts the central child") {
    auto t = PinwheelTriangle::from_vertices({3, -7}, {3, 2.5}, {22, -7}, 2);
    auto central = subdivide(t)[2];
    auto back = central_parent(central);
    CHECK(back.right_angle.x == doctest::Approx(t.right_angle.x).epsilon(1e-12));
    CHECK(back.right_angle.y == doctest::Approx(t.right_angle.y).epsilon(1e-12));
    CHECK(back.short_end.x == doctest::Approx(t.short_end.x).epsilon(1e-12));
    CHECK(back.long_end.y == doctest::Approx(t.long_end.y).epsilon(1e-12));
    CHECK(back.level == t.level);
    CHECK(back.chirality == t.chirality);
}

TEST_CASE("expansion covers windows and rotates by gamma") {
    auto seed = PinwheelTriangle::from_vertices({0, 0}, {0, 25}, {50, 0}, 0);

    Rect bbox{0.0, 0.0, 50.0, 25.0};
    auto r1 = expand_to_cover(seed, bbox);
    for (Vec2 c : {Vec2{0, 0}, Vec2{50, 0}, Vec2{0, 25}, Vec2{50, 25}})
        CHECK(r1.ancestor.contains(c));

    double rad = 100.0 * std::pow(std::sqrt(5.0), 3.0);
    Vec2 cen = seed.centroid();
    Rect disk{cen.x - rad, cen.y - rad, cen.x + rad, cen.y + rad};
    auto r2 = expand_to_cover(seed, disk);
    CHECK(r2.expansions <= 14);
    for (Vec2 c : {Vec2{disk.x0, disk.y0}, Vec2{disk.x1, disk.y1}})
        CHECK(r2.ancestor.contains(c));

    // Ancestor hypotenuse angle = seed angle + expansions * gamma (mod 2pi):
    // the central-child chain preserves chirality, so no reflection term.
    double expect = seed.hyp_angle() + r2.expansions * kGamma;
    double got = r2.ancestor.hyp_angle();
    double diff = std::remainder(got - expect, 2.0 * 3.14159265358979323846);
    CHECK(std::abs(diff) < 1e-9);
}

TEST_CASE("angles of descendants contain the arithmetic progression") {
    auto t = PinwheelTriangle::from_vertices({0, 0}, {0, 1}, {2, 0}, 5);
    double theta = t.hyp_angle();

    auto a0 = angles_of_descendants(t, 0);
    REQUIRE(a0.size() == 1);
    CHECK(a0[0] == doctest::Approx(theta));

    auto contains_angle = [](const std::vector<double>& set, double want) {
        for (double a : set) {
            double d = std::remainder(a - want, 2.0 * 3.14159265358979323846);
            if (std::abs(d) < 1e-9) return true;
        }
        return false;
    };

    auto a1 = angles_of_descendants(t, 1);
    CHECK(contains_angle(a1, theta - kGamma));
    CHECK(contains_angle(a1, theta + kGamma));

    auto a5 = angles_of_descendants(t, 5);
    for (int tt = 0; tt <= 5; ++tt)
        CHECK(contains_angle(a5, theta + (2 * tt - 5) * kGamma));

    CHECK_THROWS(angles_of_descendants(t, 11));
}

TEST_CASE("graph of a window inside one atomic triangle") {
    // Deep interior of the seed triangle at scale 25.
    Rect window{20.0, 2.0, 22.0, 3.0};
    PinwheelGraph g = build_pinwheel_graph(window, 25.0);
    CHECK(g.triangles.size() == 1);
    CHECK(g.vertices.size() == 3);
    CHECK(g.edges.size() == 3);
}

TEST_CASE("graph triangle count tracks window area") {
    Rect window{0.0, 0.0, 500.0, 500.0};
    PinwheelGraph g = build_pinwheel_graph(window, 25.0);
    double expect = 2.0 * 500.0 * 500.0 / (25.0 * 50.0);  // = 800
    CHECK(g.triangles.size() >= expect * 0.9);
    CHECK(g.triangles.size() <= expect * 1.35);  // boundary triangles included

    std::set<int> lengths;
    for (size_t e = 0; e < g.edges.size(); ++e) {
        double len = g.edge_length(e);
        bool is25 = std::abs(len - 25.0) < 1e-6;
        bool is50 = std::abs(len - 50.0) < 1e-6;
        bool ishyp = std::abs(len - 25.0 * std::sqrt(5.0)) < 1e-6;
        CHECK((is25 || is50 || ishyp));
    }

    // No transversal crossings between non-adjacent edges (sampled pairs).
    for (size_t e = 0; e < g.edges.size(); e += 37)
        for (size_t f = e + 1; f < g.edges.size(); f += 41) {
            auto [a, b] = g.edges[e];
            auto [c, d] = g.edges[f];
            if (a == c || a == d || b == c || b == d) continue;
            CHECK(!segments_properly_cross(g.vertices[a], g.vertices[b], g.vertices[c],
                                           g.vertices[d]));
        }
}

TEST_CASE("embedding: axis-aligned and diagonal unit cases") {
    PinwheelGraph g;
    g.window = {0.0, 0.0, 60.0, 60.0};
    g.atomic_scale = 25.0;
    g.vertices = {{0.0, 0.0}, {25.0, 0.0}, {25.0, 25.0}};
    g.edges = {{0, 1}, {1, 2}};
    GridEmbedding emb = embed_into_grid(g);

    // Horizontal 25-edge: 25 grid edges of weight 1 each.
    REQUIRE(emb.path_map[0].size() == 26);
    CHECK(emb.interior_weight[0] == doctest::Approx(1.0));
    double sum = 0.0;
    for (size_t i = 0; i + 1 < emb.path_map[0].size(); ++i)
        sum += emb.weights.weight(EdgeKey::between(emb.path_map[0][i], emb.path_map[0][i + 1]));
    CHECK(sum == doctest::Approx(25.0).epsilon(1e-12));

    PinwheelGraph g2;
    g2.window = {0.0, 0.0, 60.0, 60.0};
    g2.atomic_scale = 25.0;
    g2.vertices = {{0.0, 0.0}, {25.0, 25.0}};
    g2.edges = {{0, 1}};
    GridEmbedding emb2 = embed_into_grid(g2);
    REQUIRE(emb2.path_map[0].size() == 51);
    CHECK(emb2.interior_weight[0] == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("embedding audit on a small real window") {
    Rect window{0.0, 0.0, 400.0, 400.0};
    PinwheelGraph g = build_pinwheel_graph(window, 25.0);
    GridEmbedding emb = embed_into_grid(g);
    EmbeddingAudit audit = audit_embedding(g, emb);
    CHECK(audit.max_path_sum_rel_err <= 1e-9);
    CHECK(audit.max_subpath_deviation <= 2.0);
    CHECK(audit.min_interior_weight >= 0.6);
    CHECK(audit.max_interior_weight <= 1.05);
    CHECK(audit.max_shared_prefix <= 2);
    CHECK(audit.off_path_all_ten);
    CHECK(audit.disjointness_ok);

    // Grid distance sandwich: embedded paths realize the graph metric.
    for (int32_t u = 0; u < static_cast<int32_t>(g.vertices.size()); u += 17)
        for (int32_t v = u + 5; v < static_cast<int32_t>(g.vertices.size()); v += 53) {
            double dg = graph_dist(g, u, v);
            if (dg == kInfWeight) continue;
            auto dw = shortest_dist(emb.weights, emb.vertex_map[u], emb.vertex_map[v],
                                    0.45 * euclid(emb.vertex_map[u], emb.vertex_map[v]) + 40.0);
            REQUIRE(dw.has_value());
            CHECK(*dw <= dg + 1e-6);
        }
}

TEST_CASE("stretch measurement basics") {
    // Unit weights: stretch is L1/L2; adjacent pair stretch exactly 1.
    WeightGrid g = WeightGrid::dense({0, 0, 50, 50}, 1.0);
    StretchTable t = measure_stretch(g, {{{3, 3}, {4, 3}}, {{0, 0}, {10, 10}}}, 2);
    CHECK(t.rows[0].stretch == doctest::Approx(1.0));
    CHECK(t.rows[1].stretch == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(t.min_additive_margin >= -1e-9);
}
