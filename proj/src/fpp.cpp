#include "gridmetric/fpp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gridmetric/geometry.hpp"
#include "gridmetric/monotone.hpp"
#include "gridmetric/shortest_path.hpp"

namespace gridmetric::fpp {

namespace {
constexpr double kPi = 3.14159265358979323846;

uint64_t edge_label(const EdgeKey& e) {
    // Injective for |coords| < 2^31, far beyond any supported window.
    return (static_cast<uint64_t>(static_cast<uint32_t>(e.base.x)) << 32) |
           static_cast<uint64_t>(static_cast<uint32_t>(e.base.y));
}
}  // namespace

void KPointDistribution::validate() const {
    if (entries.empty()) throw std::invalid_argument("k-point law: empty support");
    double sum = 0.0;
    for (auto& [p, x] : entries) {
        if (p < 0.0) throw std::invalid_argument("k-point law: negative probability");
        if (x < 0.0) throw std::invalid_argument("k-point law: negative weight");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("k-point law: probabilities sum to " + std::to_string(sum));
}

double KPointDistribution::mean() const {
    double m = 0.0;
    for (auto& [p, x] : entries) m += p * x;
    return m;
}

double KPointDistribution::max_value() const {
    double m = 0.0;
    for (auto& [p, x] : entries) m = std::max(m, x);
    return m;
}

void ContinuousDistribution::validate() const {
    switch (kind) {
        case Kind::Uniform:
            if (a < 0.0 || b <= a) throw std::invalid_argument("uniform: need 0 <= a < b");
            break;
        case Kind::Gamma:
            if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("gamma: need shape, scale > 0");
            break;
        case Kind::Exponential:
            if (a <= 0.0) throw std::invalid_argument("exponential: need rate > 0");
            break;
    }
}

EdgeDistribution parse_distribution(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("distribution: missing ':'");
    std::string kind = text.substr(0, colon);
    std::vector<double> vals;
    {
        std::stringstream ss(text.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    }
    if (kind == "uniform") {
        if (vals.size() != 2) throw std::invalid_argument("uniform: expected a,b");
        auto d = ContinuousDistribution::uniform(vals[0], vals[1]);
        d.validate();
        return d;
    }
    if (kind == "gamma") {
        if (vals.size() != 2) throw std::invalid_argument("gamma: expected shape,scale");
        auto d = ContinuousDistribution::gamma(vals[0], vals[1]);
        d.validate();
        return d;
    }
    if (kind == "exp") {
        if (vals.size() != 1) throw std::invalid_argument("exp: expected rate");
        auto d = ContinuousDistribution::exponential(vals[0]);
        d.validate();
        return d;
    }
    if (kind == "const") {
        if (vals.size() != 1) throw std::invalid_argument("const: expected value");
        KPointDistribution d{{{1.0, vals[0]}}};
        d.validate();
        return d;
    }
    if (kind.size() >= 3 && kind.substr(1) == "pt") {
        if (vals.size() % 2 != 0 || vals.empty())
            throw std::invalid_argument("k-point: expected p1,x1,p2,x2,...");
        KPointDistribution d;
        for (size_t i = 0; i < vals.size(); i += 2) d.entries.push_back({vals[i], vals[i + 1]});
        d.validate();
        return d;
    }
    throw std::invalid_argument("unknown distribution kind: " + kind);
}

namespace {

double sample_kpoint(const KPointDistribution& d, const RngStream& s) {
    double u = s.u01(0);
    double acc = 0.0;
    for (auto& [p, x] : d.entries) {
        acc += p;
        if (u < acc) return x;
    }
    return d.entries.back().second;
}

double sample_normal(RngSequence& seq) {
    double u1 = seq.u01();
    double u2 = seq.u01();
    // 1 - u1 in (0, 1], so the log is finite.
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * kPi * u2);
}

// Marsaglia-Tsang; shapes below 1 boosted through gamma(shape + 1).
double sample_gamma(double shape, double scale, RngSequence& seq) {
    if (shape < 1.0) {
        double g = sample_gamma(shape + 1.0, 1.0, seq);
        double u = seq.u01();
        return scale * g * std::pow(1.0 - u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z = sample_normal(seq);
        double t = 1.0 + c * z;
        if (t <= 0.0) continue;
        double v = t * t * t;
        double u = seq.u01();
        if (u < 1.0 - 0.0331 * z * z * z * z) return scale * d * v;
        if (u > 0.0 && std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return scale * d * v;
    }
}

double sample_continuous(const ContinuousDistribution& d, const RngStream& s) {
    RngSequence seq(s);
    switch (d.kind) {
        case ContinuousDistribution::Kind::Uniform:
            return d.a + (d.b - d.a) * seq.u01();
        case ContinuousDistribution::Kind::Exponential:
            return -std::log(1.0 - seq.u01()) / d.a;
        case ContinuousDistribution::Kind::Gamma:
            return sample_gamma(d.a, d.b, seq);
    }
    return 0.0;
}

}  // namespace

double sample_weight(const EdgeDistribution& dist, const RngStream& edge_stream) {
    if (auto* k = std::get_if<KPointDistribution>(&dist)) return sample_kpoint(*k, edge_stream);
    return sample_continuous(std::get<ContinuousDistribution>(dist), edge_stream);
}

WeightGrid sample_weight_grid(const EdgeDistribution& dist, GridRect window, uint64_t seed) {
    std::visit([](auto& d) { d.validate(); }, dist);
    RngStream base = RngStream(seed).derive(0x1db3u);
    return WeightGrid::lazy(
        window,
        [dist, base](const EdgeKey& e) {
            return sample_weight(dist, base.derive2(edge_label(e), static_cast<uint64_t>(e.axis)));
        },
        kInfWeight);
}

// ---------------------------------------------------------------------------

double DirectionalProfile::mu_at_angle(double theta) const {
    size_t best = 0;
    for (size_t i = 1; i < angles.size(); ++i)
        if (std::abs(angles[i] - theta) < std::abs(angles[best] - theta)) best = i;
    return mu_mean[best];
}

double DirectionalProfile::max_normalized_stretch() const {
    double denom = std::sqrt(mu0() * mu_at_angle(kPi / 4.0));
    double mx = 0.0;
    for (double m : mu_mean) mx = std::max(mx, m);
    return mx / denom;
}

DirectionalProfile directional_stretch(const EdgeDistribution& dist, int64_t n, int angle_count,
                                       int trials, uint64_t seed, double margin_factor,
                                       bool parallel) {
    if (n < 100) throw std::invalid_argument("directional_stretch: n < 100");
    if (trials < 1 || angle_count < 2) throw std::invalid_argument("directional_stretch: bad config");

    DirectionalProfile prof;
    prof.n = n;
    prof.trials = trials;
    prof.seed = seed;
    for (int i = 0; i < angle_count; ++i) {
        double th = (kPi / 2.0) * static_cast<double>(i) / static_cast<double>(angle_count - 1);
        prof.angles.push_back(th);
        prof.targets.push_back({static_cast<int64_t>(std::llround(n * std::cos(th))),
                                static_cast<int64_t>(std::llround(n * std::sin(th)))});
    }

    int64_t guard = static_cast<int64_t>(std::ceil(margin_factor * static_cast<double>(n))) + n + 4;
    GridRect window{-guard, -guard, guard, guard};

    std::vector<double> ratio(static_cast<size_t>(trials) * prof.targets.size(), 0.0);
    int64_t total = static_cast<int64_t>(ratio.size());

    auto task = [&](int64_t idx) {
        int trial = static_cast<int>(idx / static_cast<int64_t>(prof.targets.size()));
        size_t ai = static_cast<size_t>(idx % static_cast<int64_t>(prof.targets.size()));
        WeightGrid g = sample_weight_grid(dist, window,
                                          RngStream(seed).derive(static_cast<uint64_t>(trial)).state);
        GridPoint target = prof.targets[ai];
        double denom = euclid({0, 0}, target);
        auto d = shortest_dist(g, {0, 0}, target, margin_factor * denom);
        if (!d) throw std::runtime_error("directional_stretch: target unreachable in corridor");
        ratio[static_cast<size_t>(idx)] = *d / denom;
    };

    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int64_t idx = 0; idx < total; ++idx) task(idx);
    } else {
        for (int64_t idx = 0; idx < total; ++idx) task(idx);
    }

    size_t A = prof.targets.size();
    prof.mu_mean.assign(A, 0.0);
    prof.mu_stderr.assign(A, 0.0);
    for (size_t a = 0; a < A; ++a) {
        double sum = 0.0, sum2 = 0.0;
        for (int t = 0; t < trials; ++t) {
            double r = ratio[static_cast<size_t>(t) * A + a];
            sum += r;
            sum2 += r * r;
        }
        double mean = sum / trials;
        prof.mu_mean[a] = mean;
        if (trials > 1) {
            double var = std::max(0.0, (sum2 - trials * mean * mean) / (trials - 1));
            prof.mu_stderr[a] = std::sqrt(var / trials);
        }
    }
    return prof;
}

// ---------------------------------------------------------------------------

EmpiricalBall empirical_ball(const EdgeDistribution& dist, double n, uint64_t seed,
                             double region_factor) {
    if (n < 10.0) throw std::invalid_argument("empirical_ball: n too small");

    // Pilot estimate of the smallest directional time constant.
    int64_t np = std::max<int64_t>(128, static_cast<int64_t>(n / 8.0));
    int64_t guard = 2 * np;
    WeightGrid pilot_grid =
        sample_weight_grid(dist, {-guard, -guard, guard, guard}, RngStream(seed).derive(999).state);
    double mu_min = kInfWeight;
    int64_t h = static_cast<int64_t>(std::llround(np / std::sqrt(2.0)));
    for (GridPoint t : {GridPoint{np, 0}, GridPoint{h, h}}) {
        auto d = shortest_dist(pilot_grid, {0, 0}, t, 0.45 * euclid({0, 0}, t));
        if (d) mu_min = std::min(mu_min, *d / euclid({0, 0}, t));
    }
    if (!(mu_min > 0.0) || mu_min == kInfWeight)
        throw std::runtime_error("empirical_ball: pilot failed");

    int64_t half = static_cast<int64_t>(std::ceil(region_factor * n / mu_min));
    if ((2 * half + 1) * (2 * half + 1) > 200'000'000)
        throw std::invalid_argument("empirical_ball: working region too large");

    GridRect region{-half, -half, half, half};
    WeightGrid g = sample_weight_grid(dist, region, RngStream(seed).derive(0).state);
    DistanceField f = compute_distance_field(g, {0, 0}, region);

    EmpiricalBall ball;
    ball.n = n;
    ball.seed = seed;
    ball.region = region;
    for (size_t i = 0; i < f.dist.size(); ++i) {
        if (f.dist[i] < n || f.dist[i] == kInfWeight) continue;
        int32_t p = f.pred[i];
        if (p < 0) continue;
        if (f.dist[static_cast<size_t>(p)] < n) ball.frontier.push_back(f.point_at(i));
    }
    if (ball.frontier.empty()) throw std::runtime_error("empirical_ball: empty frontier");

    bool found = false;
    for (auto& p : ball.frontier) {
        if (p.y != 0 || p.x <= 0) continue;
        if (!found || p.x < ball.u0.x) {
            ball.u0 = p;
            found = true;
        }
    }
    if (!found) throw std::runtime_error("empirical_ball: no frontier vertex on the +x axis");
    ball.u0_norm = static_cast<double>(ball.u0.x);
    return ball;
}

double err_lp(const EmpiricalBall& ball, double p) {
    if (p < 1.0) throw std::invalid_argument("err_lp: p < 1");
    if (ball.frontier.empty()) throw std::invalid_argument("err_lp: empty frontier");
    double worst = 0.0;
    for (auto& u : ball.frontier) {
        double r = euclid({0, 0}, u);
        if (r == 0.0) continue;
        double c = std::abs(static_cast<double>(u.x)) / r;
        double s = std::abs(static_cast<double>(u.y)) / r;
        double profile = std::pow(std::pow(c, p) + std::pow(s, p), -1.0 / p);
        worst = std::max(worst, std::abs(r / ball.u0_norm - profile));
    }
    return worst;
}

std::pair<double, double> fit_p(const EmpiricalBall& ball) {
    // Coarse scan to bracket the minimum, then golden section.
    double best_p = 1.0, best_e = kInfWeight;
    constexpr int kScan = 40;
    for (int i = 0; i <= kScan; ++i) {
        double p = 1.0 + 2.0 * i / kScan;
        double e = err_lp(ball, p);
        if (e < best_e) {
            best_e = e;
            best_p = p;
        }
    }
    double lo = std::max(1.0, best_p - 2.0 / kScan);
    double hi = std::min(3.0, best_p + 2.0 / kScan);
    constexpr double kGolden = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
    double f1 = err_lp(ball, x1), f2 = err_lp(ball, x2);
    while (b - a > 1e-3) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = err_lp(ball, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = err_lp(ball, x2);
        }
    }
    double p_star = (a + b) / 2.0;
    return {p_star, err_lp(ball, p_star)};
}

// ---------------------------------------------------------------------------

MonoDirectional mono_directional(const KPointDistribution& dist, int64_t n, int trials,
                                 uint64_t seed, bool parallel) {
    dist.validate();
    if (n < 2 || trials < 1) throw std::invalid_argument("mono_directional: bad config");
    int64_t h = static_cast<int64_t>(std::llround(n / std::sqrt(2.0)));
    GridRect window{-1, -1, std::max(n, h) + 1, h + 1};
    EdgeDistribution ed = dist;

    std::vector<double> m0(static_cast<size_t>(trials)), m45(static_cast<size_t>(trials));
    auto task = [&](int t) {
        WeightGrid g =
            sample_weight_grid(ed, window, RngStream(seed).derive(static_cast<uint64_t>(t)).state);
        double straight = 0.0;
        for (int64_t i = 0; i < n; ++i) straight += g.weight({{i, 0}, Axis::Horizontal});
        m0[static_cast<size_t>(t)] = straight / static_cast<double>(n);
        m45[static_cast<size_t>(t)] =
            monodist(g, {0, 0}, {h, h}) / static_cast<double>(n);
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < trials; ++t) task(t);
    } else {
        for (int t = 0; t < trials; ++t) task(t);
    }

    auto summarize = [&](const std::vector<double>& v, double& mean, double& se) {
        double sum = std::accumulate(v.begin(), v.end(), 0.0);
        mean = sum / static_cast<double>(v.size());
        if (v.size() > 1) {
            double s2 = 0.0;
            for (double x : v) s2 += (x - mean) * (x - mean);
            se = std::sqrt(s2 / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
        }
    };
    MonoDirectional out;
    summarize(m0, out.mu0, out.mu0_stderr);
    summarize(m45, out.mu45, out.mu45_stderr);
    return out;
}

EpsStarResult find_eps_star(int64_t n, int trials, uint64_t seed, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("find_eps_star: tol must be positive");
    EpsStarResult res;
    auto mu45 = [&](double eps) {
        MonoDirectional m = mono_directional(KPointDistribution::d_eps(eps), n, trials, seed);
        res.history.push_back({eps, m.mu45});
        return m.mu45;
    };
    double lo = 0.0, hi = 1.0;
    double f_lo = mu45(lo), f_hi = mu45(hi);
    if (!(f_lo > 1.0 && f_hi < 1.0))
        throw std::runtime_error("find_eps_star: invalid bracket, mu45(0)=" + std::to_string(f_lo) +
                                 " mu45(1)=" + std::to_string(f_hi));
    double mid = 0.5, f_mid = 0.0;
    for (int iter = 0; iter < 60; ++iter) {
        mid = (lo + hi) / 2.0;
        f_mid = mu45(mid);
        if (std::abs(f_mid - 1.0) <= tol) break;
        if (f_mid > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    res.eps_star = mid;
    return res;
}

MonoBallReport mono_ball_convexity(const KPointDistribution& dist, double n, uint64_t seed) {
    dist.validate();
    MonoBallReport rep;
    rep.n = n;
    rep.noise = dist.max_value();

    // The monotone ball radius never exceeds n / min positive ... use a
    // generous quadrant: monodist >= (L1 length) * min weight, and at
    // threshold n with mean-1 weights radius stays below ~1.6 n.
    int64_t ext = static_cast<int64_t>(std::ceil(1.6 * n)) + 2;
    GridRect window{-1, -1, ext + 1, ext + 1};
    WeightGrid g = sample_weight_grid(EdgeDistribution{dist}, window,
                                      RngStream(seed).derive(0).state);
    MonoField f = monodist_field(g, {0, 0}, ext, ext);

    size_t W = static_cast<size_t>(ext + 1);
    for (int64_t j = 0; j <= ext; ++j)
        for (int64_t i = 0; i <= ext; ++i) {
            size_t idx = static_cast<size_t>(j) * W + static_cast<size_t>(i);
            if (f.dist[idx] < n) continue;
            size_t pidx;
            if (f.from[idx] == 0)
                pidx = idx - 1;
            else if (f.from[idx] == 1)
                pidx = idx - W;
            else
                continue;
            if (f.dist[pidx] < n) rep.frontier.push_back({i, j});
        }
    if (rep.frontier.empty()) throw std::runtime_error("mono_ball_convexity: empty frontier");

    // Convex hull of the frontier; violation = max inward distance from a
    // frontier point to the hull boundary.
    std::vector<Vec2> pts;
    pts.reserve(rep.frontier.size() + 1);
    pts.push_back({0.0, 0.0});  // close the shape at the origin side
    for (auto& p : rep.frontier)
        pts.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    auto cross_ok = [](Vec2 o, Vec2 a, Vec2 b) { return (a - o).cross(b - o) <= 0.0; };
    std::vector<Vec2> hull(2 * pts.size());
    size_t k = 0;
    for (auto& p : pts) {
        while (k >= 2 && cross_ok(hull[k - 2], hull[k - 1], p)) --k;
        hull[k++] = p;
    }
    size_t lower = k + 1;
    for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
        while (k >= lower && cross_ok(hull[k - 2], hull[k - 1], *it)) --k;
        hull[k++] = *it;
    }
    hull.resize(k - 1);

    for (auto& p : rep.frontier) {
        Vec2 q{static_cast<double>(p.x), static_cast<double>(p.y)};
        double d = kInfWeight;
        for (size_t i = 0; i < hull.size(); ++i)
            d = std::min(d, point_segment_dist(q, hull[i], hull[(i + 1) % hull.size()]));
        rep.violation = std::max(rep.violation, d);
    }
    rep.convex = rep.violation <= 3.0 * rep.noise;
    return rep;
}

// ---------------------------------------------------------------------------

void write_profile_csv(const std::string& path, const DirectionalProfile& profile) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "theta,mu_mean,mu_stderr,trials\n");
    for (size_t i = 0; i < profile.angles.size(); ++i)
        std::fprintf(f, "%.17g,%.17g,%.17g,%d\n", profile.angles[i], profile.mu_mean[i],
                     profile.mu_stderr[i], profile.trials);
    std::fclose(f);
}

void write_ball_csv(const std::string& path, const EmpiricalBall& ball) {
    write_points_csv(path, ball.frontier);
}

void write_points_csv(const std::string& path, const std::vector<GridPoint>& points) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "x,y\n");
    for (auto& p : points)
        std::fprintf(f, "%lld,%lld\n", static_cast<long long>(p.x), static_cast<long long>(p.y));
    std::fclose(f);
}

void write_err_scan_csv(const std::string& path, const EmpiricalBall& ball, double p_lo,
                        double p_hi, int steps) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "p,err\n");
    for (int i = 0; i <= steps; ++i) {
        double p = p_lo + (p_hi - p_lo) * i / steps;
        std::fprintf(f, "%.17g,%.17g\n", p, err_lp(ball, p));
    }
    std::fclose(f);
}

}  // namespace gridmetric::fpp
