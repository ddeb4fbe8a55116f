#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "gridmetric/grid.hpp"
#include "gridmetric/rng.hpp"

namespace gridmetric::fpp {

/// Discrete edge-weight law with finite support: P(w = x_i) = p_i.
struct KPointDistribution {
    std::vector<std::pair<double, double>> entries;  // (p_i, x_i)

    void validate() const;
    double mean() const;
    double max_value() const;

    /// 2-point law reaching ~0.75% empirical stretch.
    static KPointDistribution d2() { return {{{0.44273, 0.41401}, {0.55727, 4.75309}}}; }
    /// 3-point law reaching ~0.62% empirical stretch.
    static KPointDistribution d3() {
        return {{{0.34809, 0.20647}, {0.25735, 2.51586}, {0.39456, 9.32215}}};
    }
    /// Mean-1 family {1-eps, 1+eps} at probability 1/2 each.
    static KPointDistribution d_eps(double eps) {
        return {{{0.5, 1.0 - eps}, {0.5, 1.0 + eps}}};
    }
};

struct ContinuousDistribution {
    enum class Kind { Uniform, Gamma, Exponential };
    Kind kind = Kind::Uniform;
    double a = 0.0;  // uniform lo | gamma shape | exponential rate
    double b = 1.0;  // uniform hi | gamma scale | unused

    void validate() const;
    static ContinuousDistribution uniform(double lo, double hi) {
        return {Kind::Uniform, lo, hi};
    }
    static ContinuousDistribution gamma(double shape, double scale) {
        return {Kind::Gamma, shape, scale};
    }
    static ContinuousDistribution exponential(double rate) {
        return {Kind::Exponential, rate, 0.0};
    }
};

using EdgeDistribution = std::variant<KPointDistribution, ContinuousDistribution>;

/// Parse "2pt:p1,x1,p2,x2", "3pt:...", "uniform:a,b", "gamma:k,theta",
/// "exp:rate", "const:x".
EdgeDistribution parse_distribution(const std::string& text);

/// One weight drawn from the per-edge substream (pure in the stream).
double sample_weight(const EdgeDistribution& dist, const RngStream& edge_stream);

/// I.i.d. lazy weight grid: the weight of an edge is a pure function of
/// (seed, canonical EdgeKey), independent of query order.
WeightGrid sample_weight_grid(const EdgeDistribution& dist, GridRect window, uint64_t seed);

// ---------------------------------------------------------------------------

struct DirectionalProfile {
    int64_t n = 0;
    int trials = 0;
    uint64_t seed = 0;
    std::vector<double> angles;  // uniform grid over [0, pi/2]
    std::vector<GridPoint> targets;
    std::vector<double> mu_mean;
    std::vector<double> mu_stderr;

    double mu0() const { return mu_mean.front(); }
    double mu45() const { return mu_at_angle(0.78539816339744831); }
    double mu_at_angle(double theta) const;
    /// max over theta of mu / sqrt(mu0 * mu45); the common-mode finite-size
    /// inflation cancels in this form.
    double max_normalized_stretch() const;
};

/// Averages dist_w(0, round(n e_theta)) / ||round(n e_theta)||_2 over
/// trials, one fresh grid per trial, corridor-restricted Dijkstra with
/// margin margin_factor * distance. (trial, angle) tasks run in parallel
/// when parallel=true; results are bit-identical either way.
DirectionalProfile directional_stretch(const EdgeDistribution& dist, int64_t n, int angle_count,
                                       int trials, uint64_t seed, double margin_factor = 0.3,
                                       bool parallel = true);

// ---------------------------------------------------------------------------

struct EmpiricalBall {
    double n = 0.0;
    uint64_t seed = 0;
    GridRect region;
    std::vector<GridPoint> frontier;  // dist >= n, tree-predecessor < n
    GridPoint u0;                     // first frontier vertex on the +x axis
    double u0_norm = 0.0;
};

/// Frontier of the distance field at threshold n from one exact Dijkstra
/// run. The working region is a square of half-side
/// region_factor * n / mu_min, with mu_min from a short pilot run.
EmpiricalBall empirical_ball(const EdgeDistribution& dist, double n, uint64_t seed,
                             double region_factor = 1.25);

/// Max over the frontier of | ||u||/||u0|| - (|cos|^p + |sin|^p)^(-1/p) |.
double err_lp(const EmpiricalBall& ball, double p);

/// Golden-section minimization of err_lp over p in [1, 3] (tolerance 1e-3
/// in p), after a coarse bracketing scan.
std::pair<double, double> fit_p(const EmpiricalBall& ball);

// ---------------------------------------------------------------------------
// Monotone-path experiments.

struct MonoDirectional {
    double mu0 = 0.0;    // straight-path weight / n (mean over trials)
    double mu45 = 0.0;   // monodist(0, round(n e45)) / n (mean over trials)
    double mu0_stderr = 0.0;
    double mu45_stderr = 0.0;
};

MonoDirectional mono_directional(const KPointDistribution& dist, int64_t n, int trials,
                                 uint64_t seed, bool parallel = true);

struct EpsStarResult {
    double eps_star = 0.0;
    std::vector<std::pair<double, double>> history;  // (eps, mu45)
};

/// Bisection on eps in [0,1] until |mu45(eps) - 1| <= tol. Throws with the
/// measured endpoints if the bracket is invalid.
EpsStarResult find_eps_star(int64_t n, int trials, uint64_t seed, double tol);

struct MonoBallReport {
    double n = 0.0;
    std::vector<GridPoint> frontier;   // first quadrant
    double violation = 0.0;            // max inward distance to the frontier hull
    double noise = 0.0;                // discretization scale (max edge weight)
    bool convex = true;                // violation <= 3 * noise
};

/// First-quadrant monodist frontier at threshold n and its convexity test.
MonoBallReport mono_ball_convexity(const KPointDistribution& dist, double n, uint64_t seed);

// ---------------------------------------------------------------------------

void write_profile_csv(const std::string& path, const DirectionalProfile& profile);
void write_ball_csv(const std::string& path, const EmpiricalBall& ball);
void write_err_scan_csv(const std::string& path, const EmpiricalBall& ball, double p_lo,
                        double p_hi, int steps);
void write_points_csv(const std::string& path, const std::vector<GridPoint>& points);

}  // namespace gridmetric::fpp
