#pragma once

#include <vector>

#include "gridmetric/grid.hpp"

namespace gridmetric {

/// Minimum weight over monotone (L1-geodesic) grid paths from u to v,
/// computed by dynamic programming over the |dx| x |dy| sub-rectangle.
/// Always at least shortest_dist(u, v); +inf weights propagate.
double monodist(const WeightGrid& weights, GridPoint u, GridPoint v);

/// Full monotone-distance field from `origin` over the rectangle of
/// points origin + (i*sx, j*sy), 0 <= i <= nx, 0 <= j <= ny.
/// Row-major: entry j*(nx+1)+i. Used for monotone-ball frontiers.
struct MonoField {
    int64_t nx = 0, ny = 0;
    std::vector<double> dist;
    // Predecessor direction per point: 0 = from the x side, 1 = from the
    // y side, -1 = origin. Ties resolve to the x side.
    std::vector<int8_t> from;

    double at(int64_t i, int64_t j) const { return dist[static_cast<size_t>(j * (nx + 1) + i)]; }
};

MonoField monodist_field(const WeightGrid& weights, GridPoint origin, int64_t nx, int64_t ny,
                         int sx = 1, int sy = 1);

}  // namespace gridmetric
