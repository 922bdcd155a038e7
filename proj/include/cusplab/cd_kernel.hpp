#pragma once

// Contour-dynamics velocity u(x) = -(1/2π) ∮ ln|x - y| dy over the patch boundary.

#include <span>

#include "cusplab/contour.hpp"

namespace cusplab {

struct KernelOptions {
    int quad_order = 8;
    /// Segments closer than near_factor × their length are integrated analytically.
    double near_factor = 3.0;
    bool desingularize = true;
};

/// ∫ ln|x - y| ds along the segment p→q, times its unit tangent.
Vec2 segment_log_integral(Vec2 x, Vec2 p, Vec2 q, const KernelOptions& opt);

Vec2 velocity_at(std::span<const Contour> contours, Vec2 x, const KernelOptions& opt);
Vec2 velocity_at(const PatchState& state, Vec2 x, const KernelOptions& opt = {});

/// Reference implementation, one target after another.
void velocities_serial(std::span<const Contour> contours, std::span<const Vec2> targets,
                       std::span<Vec2> out, const KernelOptions& opt);

/// OpenMP over targets; results are bitwise identical to the serial version.
void velocities_parallel(std::span<const Contour> contours, std::span<const Vec2> targets,
                         std::span<Vec2> out, const KernelOptions& opt);

} // namespace cusplab
