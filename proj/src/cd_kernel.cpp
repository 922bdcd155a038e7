#include "cusplab/cd_kernel.hpp"

#include <cmath>
#include <numbers>

#include "cusplab/errors.hpp"
#include "cusplab/quadrature.hpp"

namespace cusplab {

namespace {

constexpr double inv_2pi = 0.5 / std::numbers::pi;

// Antiderivative of ½ ln(u² + b²) in u, b ≥ 0.
double log_antiderivative(double u, double b) {
    if (b == 0.0) return u == 0.0 ? 0.0 : u * std::log(std::abs(u)) - u;
    return 0.5 * u * std::log(u * u + b * b) - u + b * std::atan(u / b);
}

double point_segment_distance(Vec2 x, Vec2 p, Vec2 q) {
    const Vec2 d = q - p;
    const double L2 = dot(d, d);
    double t = L2 > 0 ? dot(x - p, d) / L2 : 0.0;
    t = t < 0 ? 0 : (t > 1 ? 1 : t);
    return norm(x - (p + t * d));
}

} // namespace

Vec2 segment_log_integral(Vec2 x, Vec2 p, Vec2 q, const KernelOptions& opt) {
    const Vec2 d = q - p;
    const double L = norm(d);
    if (L == 0.0) return {};
    const Vec2 t = (1.0 / L) * d;
    const bool near = point_segment_distance(x, p, q) < opt.near_factor * L;
    if (near && opt.desingularize) {
        const Vec2 r = x - p;
        const double a = dot(r, t);
        const double b = std::abs(cross(t, r));
        const double I = log_antiderivative(L - a, b) - log_antiderivative(-a, b);
        return I * t;
    }
    if (!opt.desingularize && (x == p || x == q))
        throw GeometryError("velocity: target coincides with a node and desingularization is off");
    const GaussRule& g = gauss_legendre(opt.quad_order);
    double I = 0.0;
    for (std::size_t k = 0; k < g.x.size(); ++k) {
        const Vec2 y = p + (0.5 * (1.0 + g.x[k])) * d;
        const Vec2 e = x - y;
        I += g.w[k] * 0.5 * std::log(dot(e, e));
    }
    return (0.5 * L * I) * t;
}

Vec2 velocity_at(std::span<const Contour> contours, Vec2 x, const KernelOptions& opt) {
    Vec2 u{};
    for (const auto& c : contours) {
        const std::size_t n = c.nodes.size();
        for (std::size_t i = 0; i < n; ++i)
            u += segment_log_integral(x, c.nodes[i], c.nodes[(i + 1) % n], opt);
    }
    return -inv_2pi * u;
}

Vec2 velocity_at(const PatchState& state, Vec2 x, const KernelOptions& opt) {
    return velocity_at(std::span<const Contour>(state.contours), x, opt);
}

void velocities_serial(std::span<const Contour> contours, std::span<const Vec2> targets,
                       std::span<Vec2> out, const KernelOptions& opt) {
    if (out.size() != targets.size()) throw DomainError("velocities: output size mismatch");
    for (std::size_t i = 0; i < targets.size(); ++i) out[i] = velocity_at(contours, targets[i], opt);
}

void velocities_parallel(std::span<const Contour> contours, std::span<const Vec2> targets,
                         std::span<Vec2> out, const KernelOptions& opt) {
    if (out.size() != targets.size()) throw DomainError("velocities: output size mismatch");
    const long n = static_cast<long>(targets.size());
    gauss_legendre(opt.quad_order); // build the table outside the parallel region
    if (!opt.desingularize) {
        // the singular-node check throws; keep exceptions out of the parallel region
        for (const auto& c : contours)
            for (const auto& p : c.nodes)
                for (const auto& x : targets)
                    if (x == p)
                        throw GeometryError(
                            "velocity: target coincides with a node and desingularization is off");
    }
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < n; ++i) out[i] = velocity_at(contours, targets[i], opt);
}

} // namespace cusplab
