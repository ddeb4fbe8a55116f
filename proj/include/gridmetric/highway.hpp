#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gridmetric/geometry.hpp"
#include "gridmetric/grid.hpp"

namespace gridmetric::highway {

/// Level sizes k_1 > k_2 > ... > k_m of the hierarchical construction:
/// k_1 = floor(n^(1/5)), k_{i+1} = floor(sqrt(k_i)), m minimal with
/// k_m < 100.
struct LevelParams {
    int64_t n = 0;
    std::vector<int64_t> levels;

    static LevelParams from_n(int64_t n);
    /// Explicit level list (strictly decreasing); used by tests and audits
    /// that exercise multi-level trimming below the natural n threshold.
    static LevelParams custom(int64_t n, std::vector<int64_t> ks);
};

/// One line of the arrangement: angle index j at level i, offset index t.
/// The line is { p : p . normal() = t * k^4 }, parameterized by arc length
/// along dir() from base().
struct LineSpec {
    int level = 1;  // 1-based
    int64_t k = 0;
    int64_t angle_index = 0;
    int64_t offset_index = 0;

    double theta() const;
    Vec2 dir() const;
    Vec2 normal() const;
    double offset_dist() const;  // t * k^4
    Vec2 base() const;
    Vec2 point_at(double s) const;
    /// Uniform edge weight of this line's rasterization:
    /// sqrt(a^2+1)/(|a|+1) in the |slope|<=1 frame, equivalently
    /// 1/(|cos theta| + |sin theta|).
    double weight() const;
};

/// Surviving piece [t0, t1] (arc-length parameters) of a trimmed line.
struct TrimmedSegment {
    LineSpec parent;
    double t0 = 0.0, t1 = 0.0;

    Vec2 p0() const { return parent.point_at(t0); }
    Vec2 p1() const { return parent.point_at(t1); }
    double length() const { return t1 - t0; }
};

struct LeveledSegments {
    LevelParams params;
    Rect window;  // trimming envelope (window dilated internally)
    std::vector<std::vector<TrimmedSegment>> by_level;

    std::vector<TrimmedSegment> all() const;
};

/// Removes all line intersections: Step 1 trims each level-i line against
/// the other level-i lines (strip subtraction), Step 2 against the segments
/// of lower levels (hippodrome subtraction with the minimum-gap extension
/// rule). Deterministic; per-line work parallelized when parallel=true.
LeveledSegments trim_lines(const LevelParams& params, Rect window, bool parallel = true);

/// Single interval of a line (arc-length parameters) within distance
/// delta of segment [q0,q1]; nullopt if the line stays clear.
std::optional<std::pair<double, double>> hippodrome_line_interval(Vec2 base, Vec2 dir, Vec2 q0,
                                                                  Vec2 q1, double delta);

/// Trimming core for one line over the parameter span [s_lo, s_hi]:
/// Step 1 against the other same-level lines, then Step 2 against the
/// lower-level segments in order. Returns the surviving intervals.
std::vector<std::pair<double, double>> trim_single_line(const LineSpec& line, double s_lo,
                                                        double s_hi,
                                                        const std::vector<LineSpec>& same_level,
                                                        const std::vector<TrimmedSegment>& lower,
                                                        double k);

struct RasterEdge {
    EdgeKey key;
    double weight;
};

/// Cells of the highway for `seg`, ordered along the line; consecutive
/// cells are 4-adjacent.
std::vector<GridPoint> rasterize_cells(const TrimmedSegment& seg);

/// Edges of the highway (consecutive cell pairs) with the line's weight.
std::vector<RasterEdge> rasterize_highway(const TrimmedSegment& seg);

/// True if grid point v is a cell of seg's rasterization.
bool raster_contains(const TrimmedSegment& seg, GridPoint v);

/// Lazy weight assignment: highway edges carry their segment's weight,
/// everything else weight 2. Throws if two highways touch a common vertex.
WeightGrid assemble_weights(const LeveledSegments& segments, GridRect window);

/// Infinite-grid extension by concentric ring tiling (tile sides 1000,
/// 1000, 3000, 9000, ...). Within each tile the finite construction is
/// applied to the central (n-2)x(n-2) grid; edges touching tile boundaries
/// weigh 2. Lazy; per-size constructions are cached.
WeightGrid ring_tiling_weights(int64_t extent);

struct SeparationReport {
    double min_distance = std::numeric_limits<double>::infinity();
    double min_required = 0.0;  // k_i of the pair attaining the min
    bool pass = true;
    int64_t pairs_checked = 0;
};

/// Exact minimum distance between distinct trimmed segments (for each pair,
/// required separation is k at the higher-index level of the two).
SeparationReport separation_audit(const LeveledSegments& segments);

struct PairCheck {
    GridPoint u, v;
    double euclid = 0.0;
    double dist = 0.0;  // corridor distance, or witness-path upper bound
    double additive_error = 0.0;
    bool witness = false;  // true when the witness-path bound was used
    bool lower_bound_ok = true;
};

struct VerifyReport {
    std::vector<PairCheck> pairs;
    double fitted_c = 0.0;  // max over pairs of error / (d/k_1 + k_1^4)
    int64_t lower_bound_violations = 0;
};

/// Distance guarantees on a finite build: dist >= ||u-v||_2 - 1 (hard) and
/// additive error <= C * (d/k_1 + k_1^4) with C fitted and reported.
/// Pairs whose corridor exceeds node_budget are measured with the explicit
/// highway witness path (an upper bound on the distance).
VerifyReport verify_guarantees(const WeightGrid& weights, const LeveledSegments& segments,
                               const std::vector<std::pair<GridPoint, GridPoint>>& pairs,
                               int64_t node_budget = 40'000'000);

/// Weight of the explicit witness path: walk to the best-aligned level-1
/// line, follow its surviving highway pieces (crossing gaps on weight-2
/// edges), leave near the target. Always an upper bound on dist_W(u,v).
double witness_path_weight(const LeveledSegments& segments, GridPoint u, GridPoint v);

void write_segments_csv(const std::string& path, const LeveledSegments& segments);
void write_segments_json(const std::string& path, const LeveledSegments& segments);
void write_verify_csv(const std::string& path, const VerifyReport& report);

}  // namespace gridmetric::highway
