#include "gridmetric/monotone.hpp"

#include <cstdlib>
#include <stdexcept>

namespace gridmetric {

MonoField monodist_field(const WeightGrid& weights, GridPoint origin, int64_t nx, int64_t ny,
                         int sx, int sy) {
    if (nx < 0 || ny < 0 || std::abs(sx) != 1 || std::abs(sy) != 1)
        throw std::invalid_argument("monodist_field: bad rectangle");
    MonoField f;
    f.nx = nx;
    f.ny = ny;
    size_t W = static_cast<size_t>(nx + 1);
    f.dist.assign(W * static_cast<size_t>(ny + 1), kInfWeight);
    f.from.assign(f.dist.size(), -1);
    f.dist[0] = 0.0;

    auto step_weight = [&](GridPoint a, int dx, int dy) {
        GridPoint b = a.offset(dx, dy);
        return weights.weight(EdgeKey::between(a, b));
    };

    for (int64_t j = 0; j <= ny; ++j) {
        for (int64_t i = 0; i <= nx; ++i) {
            if (i == 0 && j == 0) continue;
            GridPoint p = origin.offset(i * sx, j * sy);
            size_t idx = static_cast<size_t>(j) * W + static_cast<size_t>(i);
            double best = kInfWeight;
            int8_t from = -1;
            if (i > 0) {
                double d = f.dist[idx - 1] + step_weight(p, -sx, 0);
                if (d < best) {
                    best = d;
                    from = 0;
                }
            }
            if (j > 0) {
                double d = f.dist[idx - W] + step_weight(p, 0, -sy);
                if (d < best) {
                    best = d;
                    from = 1;
                }
            }
            f.dist[idx] = best;
            f.from[idx] = from;
        }
    }
    return f;
}

double monodist(const WeightGrid& weights, GridPoint u, GridPoint v) {
    if (!weights.window().contains(u) || !weights.window().contains(v))
        throw std::invalid_argument("monodist: point outside window");
    int64_t dx = v.x - u.x, dy = v.y - u.y;
    int sx = dx >= 0 ? 1 : -1, sy = dy >= 0 ? 1 : -1;
    MonoField f = monodist_field(weights, u, std::llabs(dx), std::llabs(dy), sx, sy);
    return f.dist.back();
}

}  // namespace gridmetric
