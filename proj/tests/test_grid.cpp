#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "gridmetric/fpp.hpp"
#include "gridmetric/monotone.hpp"
#include "gridmetric/shortest_path.hpp"
#include "oracles.hpp"

using namespace gridmetric;

namespace {

WeightGrid random_dense(GridRect r, uint64_t seed, double lo = 0.0, double hi = 4.0) {
    WeightGrid g = WeightGrid::dense(r, 1.0);
    RngStream s(seed);
    uint64_t c = 0;
    for (int64_t y = r.y0; y <= r.y1; ++y)
        for (int64_t x = r.x0; x <= r.x1; ++x) {
            if (x < r.x1) g.set({{x, y}, Axis::Horizontal}, lo + (hi - lo) * s.u01(c++));
            if (y < r.y1) g.set({{x, y}, Axis::Vertical}, lo + (hi - lo) * s.u01(c++));
        }
    return g;
}

}  // namespace

TEST_CASE("grid point ordering and edge keys") {
    GridPoint a{0, 0}, b{1, 0}, c{0, 1};
    EdgeKey ab{a, Axis::Horizontal}, ac{a, Axis::Vertical};
    CHECK(EdgeKey::between(a, b) == ab);
    CHECK(EdgeKey::between(b, a) == ab);
    CHECK(EdgeKey::between(a, c) == ac);
    GridPoint diag{1, 1};
    CHECK_THROWS(EdgeKey::between(a, diag));
    CHECK(a < b);
    CHECK(b < c);  // row-major: y dominates
    GridPoint huge{std::numeric_limits<int64_t>::max(), 0};
    CHECK_THROWS_AS(huge.offset(1, 0), std::overflow_error);
}

TEST_CASE("dense and lazy grids agree") {
    GridRect r{0, 0, 6, 6};
    WeightGrid dense = random_dense(r, 5);
    WeightGrid lazy = WeightGrid::lazy(r, [&](const EdgeKey& k) { return dense.weight(k); });
    for (int64_t y = 0; y <= 6; ++y)
        for (int64_t x = 0; x <= 6; ++x) {
            if (x < 6)
                CHECK(dense.weight({{x, y}, Axis::Horizontal}) ==
                      lazy.weight({{x, y}, Axis::Horizontal}));
            if (y < 6)
                CHECK(dense.weight({{x, y}, Axis::Vertical}) ==
                      lazy.weight({{x, y}, Axis::Vertical}));
        }
    // Outside the window both report the default.
    CHECK(dense.weight({{6, 0}, Axis::Horizontal}) == kInfWeight);
}

TEST_CASE("shortest_dist on unit weights is L1") {
    WeightGrid g = WeightGrid::dense({-2, -2, 8, 8}, 1.0);
    CHECK(*shortest_dist(g, {0, 0}, {3, 4}, 10.0) == doctest::Approx(7.0));
    WeightGrid g2 = WeightGrid::dense({-2, -2, 8, 8}, 2.0);
    CHECK(*shortest_dist(g2, {0, 0}, {3, 4}, 10.0) == doctest::Approx(14.0));
}

TEST_CASE("corridor monotonicity under a sampled grid") {
    auto dist = fpp::KPointDistribution::d2();
    GridRect w{-250, -250, 450, 250};
    WeightGrid g = fpp::sample_weight_grid(fpp::EdgeDistribution{dist}, w, 42);
    double d100 = *shortest_dist(g, {0, 0}, {200, 0}, 100.0);
    double d200 = *shortest_dist(g, {0, 0}, {200, 0}, 200.0);
    CHECK(d200 <= d100 + 1e-12);
}

TEST_CASE("trace matches dist and passes through zero-cost detours") {
    WeightGrid g = WeightGrid::dense({0, 0, 4, 4}, 1.0);
    auto t = shortest_path_trace(g, {0, 0}, {2, 0}, 2.0);
    REQUIRE(t.has_value());
    CHECK(*t == std::vector<GridPoint>{{0, 0}, {1, 0}, {2, 0}});

    // Free row at y=2: the best path detours through it.
    WeightGrid h = WeightGrid::dense({0, 0, 4, 4}, 3.0);
    for (int64_t x = 0; x < 4; ++x) h.set({{x, 2}, Axis::Horizontal}, 0.0);
    for (int64_t x : {0, 4})
        for (int64_t y = 0; y < 2; ++y) h.set({{x, y}, Axis::Vertical}, 0.25);
    auto trace = shortest_path_trace(h, {0, 0}, {4, 0}, 10.0);
    REQUIRE(trace.has_value());
    bool through_row = false;
    double total = 0.0;
    for (size_t i = 0; i + 1 < trace->size(); ++i) {
        if ((*trace)[i].y == 2) through_row = true;
        total += h.weight(EdgeKey::between((*trace)[i], (*trace)[i + 1]));
    }
    CHECK(through_row);
    CHECK(total == doctest::Approx(*shortest_dist(h, {0, 0}, {4, 0}, 10.0)).epsilon(1e-12));
    // Exhaustive check: no path beats it.
    GridRect r{0, 0, 4, 4};
    CHECK(total == doctest::Approx(testing::bellman_ford_dist(h, {0, 0}, {4, 0}, r)));
}

TEST_CASE("unreachable targets are explicit") {
    WeightGrid g = WeightGrid::dense({0, 0, 4, 1}, kInfWeight);
    auto d = shortest_dist(g, {0, 0}, {4, 0}, 4.0);
    CHECK(!d.has_value());
    CHECK(!shortest_path_trace(g, {0, 0}, {4, 0}, 4.0).has_value());
}

TEST_CASE("dijkstra equals bellman-ford on random small grids") {
    for (uint64_t seed = 1; seed <= 60; ++seed) {
        int64_t side = 3 + static_cast<int64_t>(seed % 6);
        GridRect r{0, 0, side, side};
        WeightGrid g = random_dense(r, seed);
        auto bf = testing::bellman_ford_field(g, {0, 0}, r);
        DistanceField f = compute_distance_field(g, {0, 0}, r);
        for (size_t i = 0; i < bf.size(); ++i) CHECK(f.dist[i] == doctest::Approx(bf[i]).epsilon(1e-12));
    }
}

TEST_CASE("shortest_dist is symmetric") {
    GridRect r{0, 0, 7, 7};
    WeightGrid g = random_dense(r, 99);
    for (uint64_t s = 0; s < 10; ++s) {
        RngStream rs(s);
        GridPoint u{static_cast<int64_t>(rs.bits(0) % 8), static_cast<int64_t>(rs.bits(1) % 8)};
        GridPoint v{static_cast<int64_t>(rs.bits(2) % 8), static_cast<int64_t>(rs.bits(3) % 8)};
        CHECK(*shortest_dist(g, u, v, 16.0) == doctest::Approx(*shortest_dist(g, v, u, 16.0)));
    }
}

TEST_CASE("monodist basics and DP vs enumeration") {
    WeightGrid unit = WeightGrid::dense({-1, -1, 5, 5}, 1.0);
    CHECK(monodist(unit, {0, 0}, {3, 4}) == doctest::Approx(7.0));
    CHECK(monodist(unit, {2, 2}, {2, 2}) == 0.0);

    // 0/2-valued 4x4 instance vs the 70-path enumeration.
    for (uint64_t seed = 1; seed <= 30; ++seed) {
        GridRect r{0, 0, 4, 4};
        WeightGrid g = WeightGrid::dense(r, 0.0);
        RngStream s(seed);
        uint64_t c = 0;
        for (int64_t y = 0; y <= 4; ++y)
            for (int64_t x = 0; x <= 4; ++x) {
                if (x < 4) g.set({{x, y}, Axis::Horizontal}, s.bits(c++) % 2 ? 2.0 : 0.0);
                if (y < 4) g.set({{x, y}, Axis::Vertical}, s.bits(c++) % 2 ? 2.0 : 0.0);
            }
        CHECK(monodist(g, {0, 0}, {4, 4}) ==
              doctest::Approx(testing::enumerate_monotone_min(g, {0, 0}, {4, 4})));
        // Also in a mirrored direction.
        CHECK(monodist(g, {4, 0}, {0, 4}) ==
              doctest::Approx(testing::enumerate_monotone_min(g, {4, 0}, {0, 4})));
    }
}

TEST_CASE("monodist dominates shortest_dist") {
    GridRect r{0, 0, 8, 8};
    WeightGrid g = random_dense(r, 7);
    for (uint64_t s = 0; s < 20; ++s) {
        RngStream rs(s + 100);
        GridPoint u{static_cast<int64_t>(rs.bits(0) % 9), static_cast<int64_t>(rs.bits(1) % 9)};
        GridPoint v{static_cast<int64_t>(rs.bits(2) % 9), static_cast<int64_t>(rs.bits(3) % 9)};
        CHECK(monodist(g, u, v) >= *shortest_dist(g, u, v, 20.0) - 1e-12);
    }
}

TEST_CASE("distance field export") {
    WeightGrid g = WeightGrid::dense({0, 0, 2, 2}, 1.0);
    DistanceField f = compute_distance_field(g, {0, 0}, {0, 0, 2, 2});
    f.write_csv("test_field.csv");
    std::ifstream in("test_field.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,y,dist");
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 9);
    std::remove("test_field.csv");
}

TEST_CASE("deterministic traces under ties") {
    WeightGrid g = WeightGrid::dense({0, 0, 3, 3}, 1.0);
    auto t1 = shortest_path_trace(g, {0, 0}, {3, 3}, 4.0);
    auto t2 = shortest_path_trace(g, {0, 0}, {3, 3}, 4.0);
    CHECK(*t1 == *t2);
}
