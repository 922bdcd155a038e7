#pragma once

// Effective corner ODE for the opening half-angle B(τ) and bisector A(τ).

#include <iosfwd>
#include <span>
#include <vector>

namespace cusplab {

struct EffectiveState {
    double tau = 0.0;
    double A = 0.0;
    double B = 0.0;
    double dA = 0.0;
    double dB = 0.0;
};

struct SecondDerivatives {
    double d2A = 0.0;
    double d2B = 0.0;
};

struct ModelParams {
    double B0 = 0.0;
    double startup_eps = 1e-3;
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    double tau_max = 1e4;
    int chebyshev_nodes = 24;
    double b_floor = 1e-14; ///< below this B the run stops and is flagged as cusped
};

/// Throws DomainError unless 0 < B0 < π/4 and the tolerances are positive.
void validate(const ModelParams& p);

/// Second derivatives of the ODE at a state with τ > 0 and 0 < B < π/4.
SecondDerivatives rhs(const EffectiveState& s);

/// Accepted step of a trajectory. `I` is the decay order -τB'/B, carried as an
/// integration variable so it keeps full precision when B is tiny.
struct TrajectorySample {
    EffectiveState s;
    SecondDerivatives dd;
    double I = 0.0;
};

/// Ordered sequence of samples with cubic Hermite interpolation between them.
class Trajectory {
public:
    Trajectory() = default;
    /// Samples must have strictly increasing τ. Cumulative integrals of B are built here.
    Trajectory(double B0, std::vector<TrajectorySample> samples, bool cusped = false);

    double B0() const noexcept { return B0_; }
    std::span<const TrajectorySample> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    double tau_begin() const;
    double tau_end() const;
    bool numerically_cusped() const noexcept { return cusped_; }

    /// Interpolated state; DomainError outside [tau_begin, tau_end].
    EffectiveState at(double tau) const;
    /// ∫_{tau_begin}^{tau} B dτ'.
    double integral_B(double tau) const;

    // Startup metadata, filled by integrate().
    double startup_end = 0.0;
    double startup_contraction = 0.0;
    int startup_iterations = 0;

private:
    std::size_t locate(double tau) const;

    double B0_ = 0.0;
    std::vector<TrajectorySample> samples_;
    std::vector<double> cum_B_;
    bool cusped_ = false;
};

/// Picard iteration on [0, eps] in Chebyshev-Lobatto collocation.
struct StartupResult {
    std::vector<TrajectorySample> samples; ///< collocation nodes, τ ascending from 0
    double eps = 0.0;
    double contraction = 0.0; ///< largest observed ratio of successive update norms
    int iterations = 0;
};

/// One Picard solve at p.startup_eps. ConvergenceError when the contraction factor reaches 1.
StartupResult startup(const ModelParams& p);

/// Startup (halving eps until the contraction factor is below 1/2) followed by
/// adaptive integration to p.tau_max or until B drops under p.b_floor.
Trajectory integrate(const ModelParams& p);

/// Q = -τA'/B; 0 in the τ = 0 limit.
double q_of(const EffectiveState& s);
/// I = -τB'/B; 0 in the τ = 0 limit.
double decay_order(const EffectiveState& s);

struct DecayFit {
    double delta = 0.0;    ///< -slope(log B vs log τ) - 1
    double slope_B = 0.0;
    double slope_dB = 0.0; ///< slope of log|B'| vs log τ
    int points = 0;
    double tau_lo = 0.0;
    double tau_hi = 0.0;
};

/// Least-squares fit over [tau_lo, tau_hi]. DomainError if the window is not
/// covered or holds fewer than 8 accepted steps.
DecayFit estimate_delta(const Trajectory& traj, double tau_lo, double tau_hi);

struct LimitA {
    double A_inf = 0.0;
    double tail_variation = 0.0; ///< ∫|A'| over the last decade of τ
};

/// A(tau_end) as the limit estimate; ConvergenceError if the last-decade variation exceeds tol.
LimitA limit_A(const Trajectory& traj, double tol = 1e-3);

/// Sample-wise checks of the exact identity and the monotone quantities.
struct TrajectoryAudit {
    double identity_max = 0.0;    ///< max |π A' + sin 4B|
    bool B_nonincreasing = true;  ///< B_{k+1} ≤ B_k (1 + slack)
    bool I_nondecreasing = true;  ///< I_{k+1} ≥ I_k - slack
    double q_rate_min = 0.0;      ///< min Q/τ = -A'/B over samples with τ > 0
    double q_rate_max = 0.0;
    bool q_rate_in_range = true;  ///< Q/τ ∈ [sin 4B0/(πB0), 4/π] up to relative slack
    double I_crossing = -1.0;     ///< first τ with I = 1 (linear between samples), -1 if none
};
TrajectoryAudit audit(const Trajectory& traj, double slack = 1e-10);

/// CSV `tau,A,B,dA,dB,Q,I`, one row per sample.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

} // namespace cusplab
