#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace gridmetric {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2&) const = default;

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
};

inline Vec2 midpoint(Vec2 a, Vec2 b) { return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}; }

/// Axis-aligned rectangle over the reals, [lo, hi] in both coordinates.
struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
    Rect dilated(double d) const { return {x0 - d, y0 - d, x1 + d, y1 + d}; }
    double diameter() const { return std::hypot(width(), height()); }
    Vec2 center() const { return {(x0 + x1) / 2.0, (y0 + y1) / 2.0}; }
};

/// Distance from point p to segment [a, b].
inline double point_segment_dist(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = ab.norm2();
    if (len2 == 0.0) return (p - a).norm();
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

inline double point_triangle_sign(Vec2 p, Vec2 a, Vec2 b) {
    return (b - a).cross(p - a);
}

/// True if p lies inside or on the triangle (any vertex winding).
inline bool triangle_contains(Vec2 a, Vec2 b, Vec2 c, Vec2 p, double eps = 0.0) {
    double d1 = point_triangle_sign(p, a, b);
    double d2 = point_triangle_sign(p, b, c);
    double d3 = point_triangle_sign(p, c, a);
    bool has_neg = (d1 < -eps) || (d2 < -eps) || (d3 < -eps);
    bool has_pos = (d1 > eps) || (d2 > eps) || (d3 > eps);
    return !(has_neg && has_pos);
}

inline bool segments_properly_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    double d1 = (b - a).cross(c - a);
    double d2 = (b - a).cross(d - a);
    double d3 = (d - c).cross(a - c);
    double d4 = (d - c).cross(b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) &&
           d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

/// True if triangle (a,b,c) and rectangle r intersect (closed sets).
inline bool triangle_intersects_rect(Vec2 a, Vec2 b, Vec2 c, const Rect& r) {
    // Quick reject on bounding boxes.
    double tx0 = std::min({a.x, b.x, c.x}), tx1 = std::max({a.x, b.x, c.x});
    double ty0 = std::min({a.y, b.y, c.y}), ty1 = std::max({a.y, b.y, c.y});
    if (tx1 < r.x0 || tx0 > r.x1 || ty1 < r.y0 || ty0 > r.y1) return false;
    // Any triangle vertex in rect, or any rect corner in triangle.
    if (r.contains(a) || r.contains(b) || r.contains(c)) return true;
    Vec2 corners[4] = {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}};
    for (auto& p : corners)
        if (triangle_contains(a, b, c, p)) return true;
    // Remaining case: edge crossings.
    Vec2 tri[3] = {a, b, c};
    for (int i = 0; i < 3; ++i) {
        Vec2 u = tri[i], v = tri[(i + 1) % 3];
        for (int j = 0; j < 4; ++j) {
            if (segments_properly_cross(u, v, corners[j], corners[(j + 1) % 4])) return true;
        }
    }
    return false;
}

/// Sorted, disjoint set of closed intervals on the real line, supporting
/// subtraction. Used for 1-D clipping along a line's arc-length parameter.
class IntervalSet {
public:
    IntervalSet() = default;
    IntervalSet(double lo, double hi) {
        if (lo < hi) ivs_.push_back({lo, hi});
    }

    void subtract(double lo, double hi) {
        if (!(lo < hi)) return;
        std::vector<std::pair<double, double>> out;
        out.reserve(ivs_.size() + 1);
        for (auto& [a, b] : ivs_) {
            if (b <= lo || a >= hi) {
                out.push_back({a, b});
                continue;
            }
            if (a < lo) out.push_back({a, lo});
            if (b > hi) out.push_back({hi, b});
        }
        ivs_ = std::move(out);
    }

    const std::vector<std::pair<double, double>>& intervals() const { return ivs_; }
    bool empty() const { return ivs_.empty(); }

private:
    std::vector<std::pair<double, double>> ivs_;
};

}  // namespace gridmetric
