#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace cusplab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline Vec2& operator+=(Vec2& a, Vec2 b) { a.x += b.x; a.y += b.y; return a; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Shoelace area, positive for counterclockwise polygons.
double signed_area(std::span<const Vec2> poly);

/// Signed area of poly ∩ {|x| ≤ r}, exact (triangle fan from the origin, arcs as sectors).
double disc_intersection_area(std::span<const Vec2> poly, double r);

/// Angles (atan2 convention) where the closed polygon crosses |x| = r. Returns false when
/// a vertex lies within tol·r of the circle or an edge is tangent to it.
bool circle_crossings(std::span<const Vec2> poly, double r, std::vector<double>& angles,
                      double tol = 1e-12);

int winding_number(std::span<const Vec2> poly, Vec2 p);

/// Proper or touching intersection of closed segments ab and cd.
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// Angle of the major principal axis of the (filled) polygon about its centroid.
double principal_axis_angle(std::span<const Vec2> poly);

} // namespace cusplab
