#pragma once

// Measurements on a contour-dynamics state: ball densities, the distance to the
// effective model, the leading-order velocity split, the log-Lipschitz flow map.

#include <iosfwd>
#include <span>
#include <vector>

#include "cusplab/angular_model.hpp"
#include "cusplab/contour.hpp"
#include "cusplab/effective_ode.hpp"

namespace cusplab {

/// Maps physical time to the effective model's time: τ_model = ratio · t · |ln r|.
/// The leading-order velocity has angular speed (1/2π)·(strain integral), while the
/// model's transport coupling is 1/π, hence ratio 1/2.
struct ModelClock {
    double ratio = 0.5;
    double tau(double t, double r) const;
};

struct RadialProfile {
    double t = 0.0;
    std::vector<double> radii; ///< strictly decreasing, in (0, 1]
    std::vector<double> values;
};

/// |B_r ∩ Ω| / |B_r| by exact polygon-disc clipping. GeometryError on a degenerate contour.
double G_of(const PatchState& state, double r);
RadialProfile G_profile(const PatchState& state, std::span<const double> radii);

/// Arcs of {θ : r·e^{iθ} ∈ Ω}, sorted, within [-π, π) except that an arc may wrap
/// (hi > π). GeometryError when the circle grazes a vertex or edge.
std::vector<Interval> angular_slice(const PatchState& state, double r);

/// Measure of the symmetric difference of two arc sets on the circle.
double symmetric_difference(std::span<const Interval> a, std::span<const Interval> b);

/// Arcs of the effective density at radius r and time t, via trajectory interpolation.
std::vector<Interval> effective_intervals(const Trajectory& traj, double t, double r,
                                          const ModelClock& clock = {});
bool effective_indicator(const Trajectory& traj, double t, double r, double theta,
                         const ModelClock& clock = {});

/// Angular measure of slice(r) Δ effective(r).
double theta_bar(const PatchState& state, const Trajectory& traj, double r,
                 const ModelClock& clock = {});

/// (1/πr²)∫₀^r s·θ̄(s) ds, 64-point Gauss-Legendre on each of 22 dyadic rings.
/// Nodes that graze the contour are nudged radially.
double F_of(const PatchState& state, const Trajectory& traj, double r,
            const ModelClock& clock = {});

/// G of the effective patch alone: (1/πr²)∫₀^r s·4B(τ(s)) ds.
double model_G(const Trajectory& traj, double t, double r, const ModelClock& clock = {});

struct StrainIntegrals {
    double Is = 0.0; ///< ∫_{|y|>r} sin 2φ / |y|² ω dy
    double Ic = 0.0; ///< ∫_{|y|>r} cos 2φ / |y|² ω dy
};
/// Dyadic rings in ln s from r out to the farthest node.
StrainIntegrals strain_integrals(const PatchState& state, double r);

struct DecompositionResidual {
    double r = 0.0;
    double theta = 0.0;
    Vec2 u_full;
    Vec2 u_leading;
    double residual_over_r = 0.0;
};
/// DomainError unless r > 0 and the state is a half-turn pair (or empty).
DecompositionResidual decomposition_residual(const PatchState& state, double r, double theta);

/// Radius Φ_t(r0) of the particle driven by dΦ/dt = -C*·Φ·∫_Φ^1 B(t|ln s|)/s ds,
/// carried as y = ln Φ. DomainError if t|ln Φ| leaves the trajectory.
double flow_map(double Cstar, const Trajectory& traj, double r0, double t);

struct CornerAngle {
    double half_angle = 0.0;
    double bisector = 0.0;
};
/// Opening of contour 0 on |x| = r. GeometryError unless the circle crosses it exactly twice.
CornerAngle corner_angle(const PatchState& state, double r);

struct DiagnosticsRow {
    double t, r, G, F, theta_bar, half_angle, bisector;
};
DiagnosticsRow probe(const PatchState& state, const Trajectory& traj, double r,
                     const ModelClock& clock = {});
/// CSV `t,r,G,F,theta_bar,half_angle,bisector`.
void write_diagnostics_csv(std::ostream& os, std::span<const DiagnosticsRow> rows);
/// CSV `r,theta,residual_over_r`.
void write_decomposition_csv(std::ostream& os, std::span<const DecompositionResidual> rows);

} // namespace cusplab
