#pragma once

#include <optional>
#include <vector>

#include "gridmetric/grid.hpp"

namespace gridmetric {

/// Exact shortest-path distance between two points, restricted to the
/// corridor subgraph: bounding box of {source, target} dilated by
/// `corridor_margin`, intersected with the weight window. Returns nullopt
/// when the target is unreachable within the corridor.
///
/// The restricted distance upper-bounds the unrestricted one and is
/// monotone non-increasing in the margin; callers doing long-range
/// queries should report the margin used (see stable_shortest_dist).
std::optional<double> shortest_dist(const WeightGrid& weights, GridPoint source,
                                    GridPoint target, double corridor_margin);

/// Shortest path as an ordered vertex list, source first. Ties are broken
/// lexicographically by (distance, row-major point order), so the trace is
/// deterministic. nullopt when unreachable.
std::optional<std::vector<GridPoint>> shortest_path_trace(const WeightGrid& weights,
                                                          GridPoint source, GridPoint target,
                                                          double corridor_margin);

struct StableDist {
    double dist = kInfWeight;
    double dist_wide = kInfWeight;  // re-run at 1.5x margin
    bool stable = false;            // relative change < 1e-3
};

/// Corridor stability check: run at `corridor_margin` and at 1.5x, and
/// require the relative change to stay below 1e-3.
StableDist stable_shortest_dist(const WeightGrid& weights, GridPoint source, GridPoint target,
                                double corridor_margin);

/// Single-source distance field over `region` (clipped to the window),
/// settled to exhaustion. Unreachable points carry +inf.
DistanceField compute_distance_field(const WeightGrid& weights, GridPoint source, GridRect region);

/// Default corridor margin policy for long-range queries: 0.3 * ||u-v||_2.
inline double default_corridor_margin(GridPoint u, GridPoint v) { return 0.3 * euclid(u, v); }

}  // namespace gridmetric
