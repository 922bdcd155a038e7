#pragma once

// Cubic Hermite pieces on [x0, x0 + h] given values and slopes at both ends.

namespace cusplab::hermite {

struct Node {
    double y;
    double dy;
};

inline double value(double h, Node a, Node b, double u) {
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * a.y + (u3 - 2 * u2 + u) * h * a.dy + (-2 * u3 + 3 * u2) * b.y +
           (u3 - u2) * h * b.dy;
}

inline double slope(double h, Node a, Node b, double u) {
    const double u2 = u * u;
    return ((6 * u2 - 6 * u) * a.y + (-6 * u2 + 6 * u) * b.y) / h + (3 * u2 - 4 * u + 1) * a.dy +
           (3 * u2 - 2 * u) * b.dy;
}

/// Integral of the interpolant from x0 to x0 + u*h.
inline double integral(double h, Node a, Node b, double u) {
    const double u2 = u * u, u3 = u2 * u, u4 = u3 * u;
    return h * ((u - u3 + 0.5 * u4) * a.y + (0.5 * u2 - 2.0 * u3 / 3.0 + 0.25 * u4) * h * a.dy +
                (u3 - 0.5 * u4) * b.y + (-u3 / 3.0 + 0.25 * u4) * h * b.dy);
}

/// Whole-interval integral: trapezoid plus the endpoint-slope correction.
inline double integral(double h, Node a, Node b) {
    return 0.5 * h * (a.y + b.y) + h * h * (a.dy - b.dy) / 12.0;
}

} // namespace cusplab::hermite
