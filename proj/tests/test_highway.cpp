#include <doctest.h>

#include <cmath>

#include "gridmetric/highway.hpp"
#include "gridmetric/shortest_path.hpp"

using namespace gridmetric;
using namespace gridmetric::highway;

TEST_CASE("level parameters") {
    CHECK(LevelParams::from_n(100000).levels == std::vector<int64_t>{10});
    CHECK(LevelParams::from_n(10'000'000'000LL).levels == std::vector<int64_t>{100, 10});
    CHECK(LevelParams::from_n(32).levels == std::vector<int64_t>{2});
    CHECK(LevelParams::from_n(1'000'000).levels == std::vector<int64_t>{15});
    CHECK(LevelParams::from_n(10000).levels == std::vector<int64_t>{6});
    CHECK_THROWS(LevelParams::from_n(1));
    CHECK_THROWS(LevelParams::custom(100, {4, 9}));
}

TEST_CASE("line spec geometry and weights") {
    LineSpec horizontal{1, 4, 0, 0};
    CHECK(horizontal.weight() == doctest::Approx(1.0));
    LineSpec diag{1, 4, 1, 0};  // theta = pi/4
    CHECK(diag.weight() == doctest::Approx(std::sqrt(2.0) / 2.0));
    // Slope 1/2 via the formula sqrt(a^2+1)/(|a|+1).
    double a = 0.5;
    double expect = std::sqrt(a * a + 1.0) / (std::abs(a) + 1.0);
    CHECK(expect == doctest::Approx(0.74535599249993).epsilon(1e-12));
    // Parallel spacing: offset t scales the normal by k^4.
    LineSpec off{1, 4, 0, 3};
    CHECK(off.offset_dist() == doctest::Approx(3.0 * 256.0));
}

TEST_CASE("step 1: perpendicular crossing removes a 2k gap") {
    LineSpec h{1, 2, 0, 0};   // horizontal through origin
    LineSpec v{1, 2, 1, 0};   // vertical through origin
    auto kept = trim_single_line(h, -50.0, 50.0, {v}, {}, 2.0);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].first == doctest::Approx(-50.0));
    CHECK(kept[0].second == doctest::Approx(-2.0));
    CHECK(kept[1].first == doctest::Approx(2.0));
    CHECK(kept[1].second == doctest::Approx(50.0));
}

TEST_CASE("one line with no other features keeps its full span") {
    auto kept = trim_single_line(LineSpec{1, 1, 0, 0}, -10.0, 12.0, {}, {}, 1.0);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].first == doctest::Approx(-10.0));
    CHECK(kept[0].second == doctest::Approx(12.0));
}

TEST_CASE("step 2: short fat intersection is extended to exactly k, A fixed") {
    // Horizontal level-2 line; a vertical lower-level segment ends 3.9
    // above it, so Fat(s, 4) cuts |x| <= sqrt(16 - 3.9^2) = 0.88882,
    // an interval of length 1.78 < k = 4.
    LineSpec h{2, 4, 0, 0};
    LineSpec vparent{1, 20, 10, 0};  // theta = pi/2
    TrimmedSegment s{vparent, 3.9, 100.0};
    CHECK(s.p0().x == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(s.p0().y == doctest::Approx(3.9));

    double A = -std::sqrt(16.0 - 3.9 * 3.9);
    auto kept = trim_single_line(h, -50.0, 50.0, {}, {s}, 4.0);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].second == doctest::Approx(A).epsilon(1e-9));
    CHECK(kept[1].first == doctest::Approx(A + 4.0).epsilon(1e-9));
}

TEST_CASE("hippodrome interval matches sampled distances") {
    Vec2 base{0.0, 0.0}, dir{1.0, 0.0};
    Vec2 q0{3.0, 2.0}, q1{8.0, 5.0};
    double delta = 2.5;
    auto iv = hippodrome_line_interval(base, dir, q0, q1, delta);
    REQUIRE(iv.has_value());
    // Dense scan along the line as the oracle.
    double lo = kInfWeight, hi = -kInfWeight;
    for (double s = -5.0; s <= 15.0; s += 1e-3) {
        if (point_segment_dist({s, 0.0}, q0, q1) <= delta) {
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    }
    CHECK(iv->first == doctest::Approx(lo).epsilon(1e-3));
    CHECK(iv->second == doctest::Approx(hi).epsilon(1e-3));

    // Clear line.
    CHECK(!hippodrome_line_interval(base, dir, {0.0, 10.0}, {5.0, 10.0}, 2.0).has_value());
}

TEST_CASE("rasterization weights and staircase structure") {
    // Horizontal highway: weight 1, straight row.
    LineSpec h{1, 4, 0, 0};
    TrimmedSegment hs{h, 0.0, 10.0};
    auto edges = rasterize_highway(hs);
    for (auto& e : edges) CHECK(e.weight == doctest::Approx(1.0));
    CHECK(edges.size() == 10);

    // Diagonal: weight sqrt(2)/2, connected staircase.
    LineSpec d{1, 4, 1, 0};
    TrimmedSegment ds{d, 0.0, 14.0};
    auto dedges = rasterize_highway(ds);
    for (auto& e : dedges) CHECK(e.weight == doctest::Approx(std::sqrt(2.0) / 2.0));
    auto cells = rasterize_cells(ds);
    for (size_t i = 0; i + 1 < cells.size(); ++i) CHECK(l1(cells[i], cells[i + 1]) == 1);
    for (auto& c : cells) CHECK(raster_contains(ds, c));
}

TEST_CASE("highway discrepancy stays within 1 (slope 1/2 example)") {
    // Slope 1/2 through a generic intercept; exhaustive pair check.
    LineSpec base{1, 8, 1, 0};  // theta = pi/8, slope tan(pi/8) ~ 0.414
    TrimmedSegment seg{base, 0.0, 600.0};
    auto cells = rasterize_cells(seg);
    double w = base.weight();
    for (size_t i = 0; i < cells.size(); i += 7)
        for (size_t j = i + 1; j < cells.size(); j += 3) {
            double path = w * static_cast<double>(j - i);
            double eu = euclid(cells[i], cells[j]);
            CHECK(std::abs(path - eu) <= 1.0 + 1e-9);
        }
}

TEST_CASE("assemble weights: empty set, single highway, collisions") {
    LevelParams params = LevelParams::custom(64, {2});
    LeveledSegments empty;
    empty.params = params;
    empty.by_level.resize(1);
    WeightGrid g = assemble_weights(empty, {0, 0, 63, 63});
    CHECK(g.weight({{5, 5}, Axis::Horizontal}) == doctest::Approx(2.0));

    // One horizontal highway through y = 10.
    LeveledSegments single = empty;
    LineSpec h{1, 2, 0, 0};
    // Line through y=10: use a custom spec offset; angle 0 normal is (0,1),
    // spacing k^4 = 16 so t=... use base offset via segment on line y=0 then
    // shift the window instead: simply place the line at t=0 and query row 0.
    single.by_level[0].push_back({h, 2.0, 40.0});
    WeightGrid g2 = assemble_weights(single, {0, -20, 63, 43});
    CHECK(g2.weight({{10, 0}, Axis::Horizontal}) == doctest::Approx(1.0));
    CHECK(g2.weight({{10, 5}, Axis::Horizontal}) == doctest::Approx(2.0));
    CHECK(g2.weight({{10, 0}, Axis::Vertical}) == doctest::Approx(2.0));

    // Two crossing highways -> vertex collision must throw on query.
    LeveledSegments bad = empty;
    bad.by_level[0].push_back({LineSpec{1, 2, 0, 0}, -40.0, 40.0});
    bad.by_level[0].push_back({LineSpec{1, 2, 1, 0}, -40.0, 40.0});
    WeightGrid g3 = assemble_weights(bad, {-50, -50, 50, 50});
    CHECK_THROWS(g3.weight({{0, 0}, Axis::Horizontal}));
}

TEST_CASE("trimmed n=2000 build: separation audit and assembly") {
    LevelParams params = LevelParams::from_n(2000);  // k = 4
    Rect win{0.0, 0.0, 1999.0, 1999.0};
    LeveledSegments segs = trim_lines(params, win, true);
    CHECK(!segs.by_level[0].empty());

    // Deterministic: parallel and serial trimming agree exactly.
    LeveledSegments serial = trim_lines(params, win, false);
    REQUIRE(serial.by_level[0].size() == segs.by_level[0].size());
    for (size_t i = 0; i < serial.by_level[0].size(); ++i) {
        CHECK(serial.by_level[0][i].t0 == segs.by_level[0][i].t0);
        CHECK(serial.by_level[0][i].t1 == segs.by_level[0][i].t1);
    }

    SeparationReport rep = separation_audit(segs);
    CHECK(rep.pass);
    CHECK(rep.min_distance >= 4.0 * (1.0 - 1e-6));

    WeightGrid g = assemble_weights(segs, {0, 0, 1999, 1999});
    // Distances respect the lower bound on a few pairs.
    VerifyReport vr = verify_guarantees(g, segs,
                                        {{{100, 100}, {400, 350}},
                                         {{50, 900}, {700, 1000}},
                                         {{1500, 200}, {1800, 1800}}});
    CHECK(vr.lower_bound_violations == 0);
    for (auto& pc : vr.pairs) {
        CHECK(!pc.witness);
        CHECK(pc.dist >= pc.euclid - 1.0);
    }
}

TEST_CASE("witness path upper-bounds the true distance") {
    LevelParams params = LevelParams::from_n(2000);
    Rect win{0.0, 0.0, 1999.0, 1999.0};
    LeveledSegments segs = trim_lines(params, win, true);
    WeightGrid g = assemble_weights(segs, {0, 0, 1999, 1999});
    for (auto [u, v] : std::vector<std::pair<GridPoint, GridPoint>>{
             {{100, 100}, {1200, 300}}, {{50, 1800}, {1700, 200}}, {{900, 900}, {1000, 1100}}}) {
        double wit = witness_path_weight(segs, u, v);
        double dij = *shortest_dist(g, u, v, default_corridor_margin(u, v));
        CHECK(wit >= dij - 1e-9);
        CHECK(dij >= euclid(u, v) - 1.0);
    }
}

TEST_CASE("ring tiling tile sizes and boundary weights") {
    WeightGrid g = ring_tiling_weights(5000);
    // Edge on the exact boundary of the central tile: x = 499 column is the
    // last vertex column of the central tile.
    CHECK(g.weight({{499, 0}, Axis::Vertical}) == doctest::Approx(2.0));
    CHECK(g.weight({{499, 0}, Axis::Horizontal}) == doctest::Approx(2.0));
    CHECK(g.weight({{-500, 3}, Axis::Vertical}) == doctest::Approx(2.0));

    // Deep inside a ring-2 3000-tile the weight matches the standalone
    // construction of the same inner size at the same relative position.
    // Tile (1,0) of ring 2 spans x in [1500, 4499]: interior starts 1501.
    LevelParams params = LevelParams::from_n(2998);
    Rect win{0.0, 0.0, 2997.0, 2997.0};
    LeveledSegments segs = trim_lines(params, win, true);
    WeightGrid inner = assemble_weights(segs, {0, 0, 2997, 2997});
    for (GridPoint local : std::vector<GridPoint>{{700, 700}, {1205, 333}, {2000, 2600}}) {
        GridPoint global{1500 + 1 + local.x, -1500 + 1 + local.y};
        CHECK(g.weight({global, Axis::Horizontal}) ==
              doctest::Approx(inner.weight({local, Axis::Horizontal})));
        CHECK(g.weight({global, Axis::Vertical}) ==
              doctest::Approx(inner.weight({local, Axis::Vertical})));
    }
    CHECK_THROWS(ring_tiling_weights(3'000'000));
}
