#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gridmetric/geometry.hpp"
#include "gridmetric/grid.hpp"

namespace gridmetric::pinwheel {

/// One 1:2:sqrt(5) right triangle of the recursive tiling, in canonical
/// vertex order: right-angle vertex, short-leg end, long-leg end. Level-i
/// triangles have short leg sqrt(5)^i * atomic_scale.
struct PinwheelTriangle {
    Vec2 right_angle;
    Vec2 short_end;
    Vec2 long_end;
    int level = 0;
    enum class Chirality { Left, Right };
    Chirality chirality = Chirality::Right;

    double short_len() const { return (short_end - right_angle).norm(); }
    double long_len() const { return (long_end - right_angle).norm(); }
    double hyp_len() const { return (long_end - short_end).norm(); }
    /// Directed hypotenuse angle (short end -> long end), in [0, 2*pi).
    double hyp_angle() const;
    Vec2 centroid() const;
    double area() const;
    bool contains(Vec2 p, double eps = 0.0) const;

    /// Enforces the 1:2:sqrt(5) side ratios (relative tolerance 1e-9).
    void validate() const;

    /// Canonical form of a raw vertex triple (sides identify the roles).
    static PinwheelTriangle from_vertices(Vec2 a, Vec2 b, Vec2 c, int level);
};

/// The five-way substitution. Children tile the parent exactly, each one
/// level lower; the central child is index 2.
std::array<PinwheelTriangle, 5> subdivide(const PinwheelTriangle& t);

/// Inverse of the substitution through the central child: the unique
/// parent whose central child is `t`.
PinwheelTriangle central_parent(const PinwheelTriangle& t);

struct ExpandResult {
    PinwheelTriangle ancestor;
    int expansions = 0;
};

/// Expands `seed` through central parents until the ancestor contains the
/// window.
ExpandResult expand_to_cover(const PinwheelTriangle& seed, const Rect& window);

/// Hypotenuse angles (mod 2*pi, deduplicated) of all level-(x-k)
/// descendants, by full 5^k enumeration. Guarded at k <= 10.
std::vector<double> angles_of_descendants(const PinwheelTriangle& t, int k);

/// Plane graph of the atomic triangles meeting a window: vertex and edge
/// sets are unions over the triangles (exactly shared edges deduplicated).
struct PinwheelGraph {
    Rect window;
    double atomic_scale = 25.0;
    std::vector<Vec2> vertices;
    std::vector<std::pair<int32_t, int32_t>> edges;  // vertex ids, first < second
    std::vector<PinwheelTriangle> triangles;

    double edge_length(size_t e) const {
        return (vertices[static_cast<size_t>(edges[e].second)] -
                vertices[static_cast<size_t>(edges[e].first)])
            .norm();
    }
};

PinwheelGraph build_pinwheel_graph(const Rect& window, double atomic_scale = 25.0,
                                   int64_t triangle_limit = 4'000'000);

/// Shortest-path distance inside the pinwheel graph itself (edge weights =
/// Euclidean lengths).
double graph_dist(const PinwheelGraph& g, int32_t src, int32_t dst);

/// The embedding of the pinwheel graph into the grid: vertices snap to
/// nearby integer points, each tiling edge becomes a monotone staircase,
/// staircases of edges sharing a vertex may share at most a 2-edge prefix,
/// staircases of disjoint edges are fully disjoint. Edge weights make each
/// staircase sum to the exact Euclidean length of its tiling edge; all
/// remaining grid edges weigh 10.
struct GridEmbedding {
    std::vector<GridPoint> vertex_map;               // per graph vertex
    std::vector<std::vector<GridPoint>> path_map;    // per graph edge, phi(u)..phi(v)
    std::vector<double> interior_weight;             // per graph edge
    std::vector<int> shared_edge_count;              // weight-1 edges in the path
    std::vector<int> offset_used;                    // routing offset per edge (0, +-1..3)
    GridRect grid_window;
    WeightGrid weights;                              // dense, default weight 10
};

GridEmbedding embed_into_grid(const PinwheelGraph& g);

struct EmbeddingAudit {
    double max_path_sum_rel_err = 0.0;   // vs exact Euclidean edge length
    double max_subpath_deviation = 0.0;  // |subpath weight - subpath Euclidean|
    double min_interior_weight = kInfWeight;
    double max_interior_weight = 0.0;
    int max_shared_prefix = 0;           // grid edges shared by two paths
    int64_t off_path_samples = 0;
    bool off_path_all_ten = true;
    bool disjointness_ok = true;
    bool pass(double subpath_budget = 2.0) const {
        return max_path_sum_rel_err <= 1e-9 && max_subpath_deviation <= subpath_budget &&
               min_interior_weight >= 0.6 && max_interior_weight <= 1.05 &&
               max_shared_prefix <= 2 && off_path_all_ten && disjointness_ok;
    }
};

/// Self-validation pass over a produced embedding. Subpaths are checked
/// exhaustively per path up to `subpath_cap` path length, sampled beyond.
EmbeddingAudit audit_embedding(const PinwheelGraph& g, const GridEmbedding& emb,
                               uint64_t sample_seed = 1, int64_t subpath_cap = 160);

struct StretchRow {
    GridPoint u, v;
    double euclid = 0.0;
    double dist = 0.0;
    double stretch = 0.0;
    bool reachable = true;
};

struct StretchBin {
    double d_lo = 0.0, d_hi = 0.0;
    double max_stretch = 0.0;
    double mean_stretch = 0.0;
    int64_t count = 0;
};

struct StretchTable {
    std::vector<StretchRow> rows;
    std::vector<StretchBin> bins;
    double min_additive_margin = 0.0;  // min over pairs of dist - euclid
};

/// Per-pair stretch dist_w(u,v) / ||u-v||_2 with corridor Dijkstra, plus a
/// binned aggregate table (log-spaced distance bins).
StretchTable measure_stretch(const WeightGrid& weights,
                             const std::vector<std::pair<GridPoint, GridPoint>>& pairs,
                             int bin_count = 8, double margin_factor = 0.3);

void write_tiling_json(const std::string& path, const PinwheelGraph& g);
void write_embedding_json(const std::string& path, const PinwheelGraph& g,
                          const GridEmbedding& emb);
void write_stretch_csv(const std::string& path, const StretchTable& table);

}  // namespace gridmetric::pinwheel
