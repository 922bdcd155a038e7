#pragma once

// Angular transport of a piecewise-constant density g(τ, θ) ∈ {0, 1} and the
// integral form of the effective system, used as independent checks on effective_ode.

#include <iosfwd>
#include <numbers>
#include <span>
#include <vector>

#include "cusplab/effective_ode.hpp"

namespace cusplab {

/// Endpoint speed: dθ/dτ = -(kTransportCoupling/τ)[sin 2θ J^s + cos 2θ J^c].
/// This is the normalisation under which the patch form reproduces effective_ode exactly.
inline constexpr double kTransportCoupling = 1.0 / std::numbers::pi;
/// Prefactor of the integral system; twice the transport coupling.
inline constexpr double kIntegralCoupling = 2.0 / std::numbers::pi;

struct JRates {
    double s = 0.0; ///< ∫ sin 2θ g dθ
    double c = 0.0; ///< ∫ cos 2θ g dθ
};

/// Moments of the two-arc patch with bisector A and half-width B.
JRates j_rates(const EffectiveState& s);

struct Interval {
    double lo = 0.0;
    double hi = 0.0; ///< lo < hi, hi - lo < 2π; endpoints are unwrapped angles
};

/// Indicator of a finite union of disjoint arcs. The full circle is a separate state
/// because it has no endpoints to transport.
class AngularDensity {
public:
    static AngularDensity empty();
    static AngularDensity full();
    /// [A-B, A+B] ∪ [π+A-B, π+A+B].
    static AngularDensity patch(double A, double B);
    /// Arcs as given; if two_fold, the π-shifted copies are appended.
    static AngularDensity from_arcs(std::vector<Interval> arcs, bool two_fold);

    bool is_full() const noexcept { return full_; }
    bool two_fold() const noexcept { return two_fold_; }
    /// For two-fold densities the first half of the list generates the second half (+π).
    std::span<const Interval> arcs() const noexcept { return arcs_; }
    double measure() const;
    bool contains(double theta) const;
    JRates moments() const;

private:
    std::vector<Interval> arcs_;
    bool full_ = false;
    bool two_fold_ = false;
    friend AngularDensity evolve_arcs(const AngularDensity&, std::vector<Interval>);
};

/// J^s(τ), J^c(τ) accumulated along a trajectory by the Hermite-corrected trapezoid.
class JIntegrals {
public:
    explicit JIntegrals(const Trajectory& traj);
    JRates at(double tau) const;
    /// J(τ)/τ, with the τ → 0 limit j(0).
    JRates mean(double tau) const;
    double tau_end() const noexcept { return tau_.back(); }

private:
    std::vector<double> tau_;
    std::vector<JRates> rate_, drate_, cum_;
};

struct ResidualProfile {
    std::vector<double> tau;
    std::vector<double> res_B; ///< τB' + κ sin2B (cos2A X1 - sin2A X2)
    std::vector<double> res_A; ///< τA' + κ cos2B (sin2A X1 + cos2A X2)
    double max_rel_B = 0.0;    ///< max|res_B| / max|τB'|
    double max_rel_A = 0.0;    ///< max|res_A| / max|τA'|
    double max_relative() const { return max_rel_B > max_rel_A ? max_rel_B : max_rel_A; }
};

/// Residuals of the integral system on trajectory samples with τ ≤ tau_hi.
/// DomainError if any sample interval in range is wider than max_spacing.
ResidualProfile integral_residual(const Trajectory& traj, double tau_hi = 10.0,
                                  double max_spacing = 0.5);

struct TransportOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    double merge_length = 1e-12;
};

/// Endpoints advected by the field whose J^s, J^c come from the trajectory.
AngularDensity transport_evolve(const AngularDensity& g0, const Trajectory& traj, double tau_end,
                                const TransportOptions& opt = {});

/// Same equation with J^s, J^c generated by the evolving density itself. Carries
/// K = J/τ, which obeys τK' = M(g) - K with K(0) = M(g0).
AngularDensity transport_evolve_self_consistent(const AngularDensity& g0, double tau_end,
                                                const TransportOptions& opt = {});

/// CSV `tau,Js,Jc,endpoints...` of the trajectory-driven transport at the given τ values.
void write_angular_csv(std::ostream& os, const AngularDensity& g0, const Trajectory& traj,
                       std::span<const double> taus);

} // namespace cusplab
