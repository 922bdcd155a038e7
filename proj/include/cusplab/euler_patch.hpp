#pragma once

// Vortex-patch evolution by contour dynamics.

#include <iosfwd>

#include "cusplab/cd_kernel.hpp"
#include "cusplab/contour.hpp"

namespace cusplab {

struct CDConfig {
    std::size_t n_nodes = 1024;
    double dt = 1e-3;
    int quad_order = 8;
    double near_factor = 3.0;
    bool symmetrize = true;
    bool remesh = true;
    bool pin_origin = true; ///< corner_anchor after every step of a symmetric corner patch
    bool parallel = true;
    double cfl_limit = 0.5;

    KernelOptions kernel() const { return {quad_order, near_factor, true}; }
};

/// Throws ConfigError on non-positive dt, n_nodes < 8, quad_order outside [1, 128], ...
void validate(const CDConfig& cfg);

struct StepReport {
    double cfl = 0.0; ///< dt × max |Δu|/|Δx| over boundary segments
    bool remeshed = false;
    double max_speed = 0.0;
};

/// Node velocities. Symmetric pairs evaluate contour 0 only and mirror the result.
std::vector<std::vector<Vec2>> node_velocities(const PatchState& state, const KernelOptions& opt,
                                               bool parallel = true);

/// One RK4 step, then remesh, then symmetrize / pin when configured.
/// InvariantViolation if the CFL guard is exceeded; GeometryError on self-intersection.
StepReport advance(PatchState& state, const CDConfig& cfg);
PatchState step(const PatchState& state, const CDConfig& cfg);

/// Two wedges of half-angle B0 about the x-axis and its π-rotation, each closed by the
/// circular arc tangent to both sides, reaching out to radius r_outer. Sides are graded
/// geometrically from r_min toward the origin; n_nodes counts both contours.
struct CornerMesh {
    double r_min = 1e-5;
    double grading = 0.15;
    double curvature = 0.1;
};
PatchState make_corner_patch(double B0, double r_outer, std::size_t n_nodes,
                             const CornerMesh& mesh = {});
/// Radius up to which the corner patch is an exact sector.
double corner_sector_radius(double B0, double r_outer);

PatchState make_disc(double R, std::size_t n);
/// Semi-axes a along x, b along y, nodes uniform in the ellipse parameter.
PatchState make_ellipse(double a, double b, std::size_t n);

/// Pins the corner node of both contours at the origin. DomainError unless the
/// state is a symmetric corner pair.
void corner_anchor(PatchState& state);
void symmetrize(PatchState& state);
/// Local insertion / deletion against each contour's MeshSpec. Returns true if nodes changed.
bool remesh(PatchState& state);

double total_area(const PatchState& state);
/// Max distance between contour 1 and the π-rotation of contour 0.
double symmetry_error(const PatchState& state);
/// GeometryError if any contour self-intersects or two contours cross (the shared corner excepted).
void check_simple(const PatchState& state);

/// Rows `t,node_index,x,y` for one contour; header when requested.
void write_snapshot_csv(std::ostream& os, const PatchState& state, std::size_t contour,
                        bool header);

} // namespace cusplab
