#include "cusplab/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace cusplab {

double signed_area(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i) a += cross(poly[i], poly[(i + 1) % n]);
    return 0.5 * a;
}

namespace {

// Signed area of triangle (0, a, b) ∩ disc of radius r.
double wedge_disc_area(Vec2 a, Vec2 b, double r) {
    const Vec2 d = b - a;
    const double qa = dot(d, d);
    if (qa == 0.0) return 0.0;
    const double qb = 2 * dot(a, d);
    const double qc = dot(a, a) - r * r;
    double ts[4];
    int nt = 0;
    ts[nt++] = 0.0;
    const double disc = qb * qb - 4 * qa * qc;
    if (disc > 0.0) {
        const double sq = std::sqrt(disc);
        // stable roots
        const double q = -0.5 * (qb + std::copysign(sq, qb));
        double t1 = q / qa, t2 = q != 0.0 ? qc / q : t1;
        if (t1 > t2) std::swap(t1, t2);
        if (t1 > 0.0 && t1 < 1.0) ts[nt++] = t1;
        if (t2 > 0.0 && t2 < 1.0) ts[nt++] = t2;
    }
    ts[nt++] = 1.0;
    double area = 0.0;
    for (int i = 0; i + 1 < nt; ++i) {
        const Vec2 p = a + ts[i] * d;
        const Vec2 q = a + ts[i + 1] * d;
        const Vec2 m = 0.5 * (p + q);
        if (dot(m, m) < r * r) // a tangent edge touches only at its midpoint
            area += 0.5 * cross(p, q);
        else
            area += 0.5 * r * r * std::atan2(cross(p, q), dot(p, q));
    }
    return area;
}

} // namespace

double disc_intersection_area(std::span<const Vec2> poly, double r) {
    const std::size_t n = poly.size();
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i) a += wedge_disc_area(poly[i], poly[(i + 1) % n], r);
    return a;
}

bool circle_crossings(std::span<const Vec2> poly, double r, std::vector<double>& angles,
                      double tol) {
    bool clean = true;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % n];
        if (std::abs(norm(a) - r) <= tol * r) clean = false;
        const Vec2 d = b - a;
        const double qa = dot(d, d);
        if (qa == 0.0) continue;
        const double qb = 2 * dot(a, d);
        const double qc = dot(a, a) - r * r;
        const double disc = qb * qb - 4 * qa * qc;
        if (disc < 0.0) continue;
        const double sq = std::sqrt(disc);
        // tangency: double root inside the segment
        const double tm = -qb / (2 * qa);
        if (sq <= tol * (std::abs(qb) + qa + r * r) && tm >= 0.0 && tm <= 1.0) clean = false;
        const double q = -0.5 * (qb + std::copysign(sq, qb));
        double t1 = q / qa, t2 = q != 0.0 ? qc / q : t1;
        if (t1 > t2) std::swap(t1, t2);
        for (double t : {t1, t2}) {
            if (t >= 0.0 && t < 1.0) {
                const Vec2 p = a + t * d;
                angles.push_back(std::atan2(p.y, p.x));
            }
            if (t1 == t2) break;
        }
    }
    return clean;
}

int winding_number(std::span<const Vec2> poly, Vec2 p) {
    int wn = 0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % n];
        const double side = cross(b - a, p - a);
        if (a.y <= p.y) {
            if (b.y > p.y && side > 0) ++wn;
        } else if (b.y <= p.y && side < 0) {
            --wn;
        }
    }
    return wn;
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    auto orient = [](Vec2 p, Vec2 q, Vec2 r) {
        const double v = cross(q - p, r - p);
        return (v > 0) - (v < 0);
    };
    auto on_seg = [](Vec2 p, Vec2 q, Vec2 r) {
        return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
               r.y <= std::max(p.y, q.y);
    };
    const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_seg(a, b, c)) return true;
    if (o2 == 0 && on_seg(a, b, d)) return true;
    if (o3 == 0 && on_seg(c, d, a)) return true;
    if (o4 == 0 && on_seg(c, d, b)) return true;
    return false;
}

double principal_axis_angle(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    double A = 0, cx = 0, cy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = poly[i], q = poly[(i + 1) % n];
        const double c = cross(p, q);
        A += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
        sxx += (p.x * p.x + p.x * q.x + q.x * q.x) * c;
        syy += (p.y * p.y + p.y * q.y + q.y * q.y) * c;
        sxy += (p.x * q.y + 2 * p.x * p.y + 2 * q.x * q.y + q.x * p.y) * c;
    }
    A *= 0.5;
    cx /= 6 * A;
    cy /= 6 * A;
    const double Ixx = sxx / 12 - A * cx * cx; // ∫ (x - cx)²
    const double Iyy = syy / 12 - A * cy * cy;
    const double Ixy = sxy / 24 - A * cx * cy;
    return 0.5 * std::atan2(2 * Ixy, Ixx - Iyy);
}

} // namespace cusplab
