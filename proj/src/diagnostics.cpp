#include "cusplab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "cusplab/cd_kernel.hpp"
#include "cusplab/csv.hpp"
#include "cusplab/dopri.hpp"
#include "cusplab/errors.hpp"
#include "cusplab/quadrature.hpp"

namespace cusplab {

namespace {
using std::numbers::pi;
constexpr double two_pi = 2 * pi;

double wrap_pi(double a) {
    a = std::fmod(a + pi, two_pi);
    if (a < 0) a += two_pi;
    return a - pi;
}

void require_radius(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("radius must be positive, got " + std::to_string(r));
}

// Slice of one contour. Crossing angles are sorted; each gap between consecutive
// crossings is classified by its midpoint.
bool contour_slice(const Contour& c, double r, std::vector<Interval>& out) {
    std::vector<double> ang;
    if (!circle_crossings(c.nodes, r, ang)) return false;
    if (ang.empty()) {
        if (winding_number(c.nodes, {r, 0.0}) != 0) out.push_back({-pi, pi});
        return true;
    }
    std::sort(ang.begin(), ang.end());
    const std::size_t n = ang.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = ang[i];
        const double hi = i + 1 < n ? ang[i + 1] : ang[0] + two_pi;
        if (hi <= lo) continue;
        const double mid = 0.5 * (lo + hi);
        if (winding_number(c.nodes, {r * std::cos(mid), r * std::sin(mid)}) != 0)
            out.push_back({lo, hi});
    }
    return true;
}

bool try_slice(const PatchState& state, double r, std::vector<Interval>& out) {
    out.clear();
    for (const auto& c : state.contours) {
        if (c.nodes.size() < 3) throw GeometryError("degenerate contour with fewer than 3 nodes");
        if (!contour_slice(c, r, out)) return false;
    }
    std::sort(out.begin(), out.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    return true;
}

// Slice at r, nudging the radius outward by relative steps of 1e-9 on grazing contact.
std::vector<Interval> robust_slice(const PatchState& state, double r) {
    std::vector<Interval> arcs;
    for (int k = 0; k < 8; ++k) {
        if (try_slice(state, r * (1.0 + 1e-9 * k), arcs)) return arcs;
    }
    throw GeometryError("circle of radius " + std::to_string(r) + " grazes the contour");
}

// Arcs cut into pieces inside [0, 2π), sorted and merged.
std::vector<Interval> normalized(std::span<const Interval> arcs) {
    std::vector<Interval> v;
    for (const auto& a : arcs) {
        const double len = a.hi - a.lo;
        if (len <= 0) continue;
        if (len >= two_pi) return {{0.0, two_pi}};
        double lo = std::fmod(a.lo, two_pi);
        if (lo < 0) lo += two_pi;
        const double hi = lo + len;
        if (hi <= two_pi) {
            v.push_back({lo, hi});
        } else {
            v.push_back({lo, two_pi});
            v.push_back({0.0, hi - two_pi});
        }
    }
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> m;
    for (const auto& a : v) {
        if (!m.empty() && a.lo <= m.back().hi)
            m.back().hi = std::max(m.back().hi, a.hi);
        else
            m.push_back(a);
    }
    return m;
}

double total_length(const std::vector<Interval>& v) {
    double s = 0.0;
    for (const auto& a : v) s += a.hi - a.lo;
    return s;
}

JRates arc_moments(const std::vector<Interval>& arcs) {
    JRates j;
    for (const auto& a : arcs) {
        j.s += 0.5 * (std::cos(2 * a.lo) - std::cos(2 * a.hi));
        j.c += 0.5 * (std::sin(2 * a.hi) - std::sin(2 * a.lo));
    }
    return j;
}

constexpr int kRings = 22;
constexpr int kRingOrder = 64;

// ∫₀^r s·f(s) ds over dyadic rings; below the last ring the contribution is dropped
// (relative weight 4^-22).
template <class F>
double dyadic_radial_integral(double r, F&& f) {
    const GaussRule& g = gauss_legendre(kRingOrder);
    double total = 0.0;
    double hi = r;
    for (int k = 0; k < kRings; ++k) {
        const double lo = 0.5 * hi;
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            const double s = mid + half * g.x[i];
            total += half * g.w[i] * s * f(s);
        }
        hi = lo;
    }
    return total;
}

bool is_two_fold(const PatchState& state) {
    if (state.contours.empty()) return true;
    if (state.symmetry == Symmetry::half_turn_pair) return true;
    if (state.contours.size() != 1) return false;
    const auto& P = state.contours[0].nodes;
    const std::size_t n = P.size();
    if (n % 2 != 0) return false;
    double scale = 0.0, err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        scale = std::max(scale, norm(P[i]));
        err = std::max(err, norm(P[i] + P[(i + n / 2) % n]));
    }
    return err <= 1e-9 * scale;
}

} // namespace

double ModelClock::tau(double t, double r) const { return ratio * t * std::abs(std::log(r)); }

double G_of(const PatchState& state, double r) {
    require_radius(r);
    double a = 0.0;
    for (const auto& c : state.contours) {
        if (c.nodes.size() < 3) throw GeometryError("degenerate contour with fewer than 3 nodes");
        a += disc_intersection_area(c.nodes, r);
    }
    return a / (pi * r * r);
}

RadialProfile G_profile(const PatchState& state, std::span<const double> radii) {
    RadialProfile p;
    p.t = state.t;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0 && radii[i] <= 1.0) || (i > 0 && radii[i] >= radii[i - 1]))
            throw DomainError("profile radii must be decreasing in (0, 1]");
        p.radii.push_back(radii[i]);
        p.values.push_back(G_of(state, radii[i]));
    }
    return p;
}

std::vector<Interval> angular_slice(const PatchState& state, double r) {
    require_radius(r);
    std::vector<Interval> arcs;
    if (!try_slice(state, r, arcs))
        throw GeometryError("circle of radius " + std::to_string(r) + " grazes the contour");
    return arcs;
}

double symmetric_difference(std::span<const Interval> a, std::span<const Interval> b) {
    const auto A = normalized(a);
    const auto B = normalized(b);
    double common = 0.0;
    std::size_t i = 0, j = 0;
    while (i < A.size() && j < B.size()) {
        const double lo = std::max(A[i].lo, B[j].lo);
        const double hi = std::min(A[i].hi, B[j].hi);
        if (hi > lo) common += hi - lo;
        if (A[i].hi < B[j].hi)
            ++i;
        else
            ++j;
    }
    return std::max(0.0, total_length(A) + total_length(B) - 2 * common);
}

std::vector<Interval> effective_intervals(const Trajectory& traj, double t, double r,
                                          const ModelClock& clock) {
    require_radius(r);
    if (r >= 1.0) throw DomainError("effective density is defined for r < 1");
    if (t < 0.0) throw DomainError("negative time");
    const double tau = clock.tau(t, r);
    if (tau > traj.tau_end()) {
        if (traj.numerically_cusped()) return {};
        throw DomainError("tau=" + std::to_string(tau) + " beyond trajectory end " +
                          std::to_string(traj.tau_end()));
    }
    const EffectiveState s = traj.at(tau);
    if (s.B <= 0.0) return {};
    return {{s.A - s.B, s.A + s.B}, {s.A + pi - s.B, s.A + pi + s.B}};
}

bool effective_indicator(const Trajectory& traj, double t, double r, double theta,
                         const ModelClock& clock) {
    for (const auto& a : effective_intervals(traj, t, r, clock)) {
        const double d = wrap_pi(theta - 0.5 * (a.lo + a.hi));
        if (std::abs(d) <= 0.5 * (a.hi - a.lo)) return true;
    }
    return false;
}

double theta_bar(const PatchState& state, const Trajectory& traj, double r, const ModelClock& clock) {
    require_radius(r);
    const auto slice = robust_slice(state, r);
    const auto model = effective_intervals(traj, state.t, r, clock);
    return symmetric_difference(slice, model);
}

double F_of(const PatchState& state, const Trajectory& traj, double r, const ModelClock& clock) {
    require_radius(r);
    const double integral =
        dyadic_radial_integral(r, [&](double s) { return theta_bar(state, traj, s, clock); });
    return integral / (pi * r * r);
}

double model_G(const Trajectory& traj, double t, double r, const ModelClock& clock) {
    require_radius(r);
    const double integral = dyadic_radial_integral(r, [&](double s) {
        const auto arcs = effective_intervals(traj, t, s, clock);
        double m = 0.0;
        for (const auto& a : arcs) m += a.hi - a.lo;
        return m;
    });
    return integral / (pi * r * r);
}

StrainIntegrals strain_integrals(const PatchState& state, double r) {
    require_radius(r);
    double R = 0.0;
    for (const auto& c : state.contours)
        for (const auto& p : c.nodes) R = std::max(R, norm(p));
    StrainIntegrals out;
    if (R <= r) return out;
    const GaussRule& g = gauss_legendre(kRingOrder);
    const double u_end = std::log(R);
    double u0 = std::log(r);
    while (u0 < u_end) {
        const double u1 = std::min(u_end, u0 + std::numbers::ln2);
        const double half = 0.5 * (u1 - u0), mid = 0.5 * (u1 + u0);
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            const JRates j = arc_moments(robust_slice(state, std::exp(mid + half * g.x[i])));
            out.Is += half * g.w[i] * j.s;
            out.Ic += half * g.w[i] * j.c;
        }
        u0 = u1;
    }
    return out;
}

DecompositionResidual decomposition_residual(const PatchState& state, double r, double theta) {
    require_radius(r);
    if (!is_two_fold(state)) throw DomainError("decomposition_residual needs a two-fold symmetric state");
    DecompositionResidual d;
    d.r = r;
    d.theta = theta;
    if (state.contours.empty()) return d;
    const Vec2 x{r * std::cos(theta), r * std::sin(theta)};
    KernelOptions opt;
    opt.quad_order = 16;
    d.u_full = velocity_at(state, x, opt);
    const StrainIntegrals I = strain_integrals(state, r);
    const double k = r / two_pi;
    d.u_leading = Vec2{std::cos(theta), -std::sin(theta)} * (k * I.Is) -
                  Vec2{std::sin(theta), std::cos(theta)} * (k * I.Ic);
    d.residual_over_r = norm(d.u_full - d.u_leading) / r;
    return d;
}

double flow_map(double Cstar, const Trajectory& traj, double r0, double t) {
    if (!(Cstar > 0.0)) throw DomainError("flow_map: C* must be positive");
    if (!(r0 > 0.0 && r0 <= 1.0)) throw DomainError("flow_map: r0 must lie in (0, 1]");
    if (t < 0.0) throw DomainError("flow_map: negative time");
    if (traj.size() == 0 || traj.tau_begin() != 0.0) throw DomainError("flow_map: trajectory must start at tau=0");
    if (t == 0.0 || r0 == 1.0) return r0;
    const double B0 = traj.samples()[0].s.B;
    auto rhs = [&](double s, const State<1>& y) -> State<1> {
        const double tau = s * std::abs(y[0]);
        if (tau > traj.tau_end())
            throw DomainError("flow_map: t|ln Phi| = " + std::to_string(tau) + " beyond trajectory end");
        const double mean_B = tau > 0.0 ? traj.integral_B(tau) / tau : B0;
        return {Cstar * y[0] * mean_B};
    };
    DopriOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-14;
    double y_end = std::log(r0);
    dopri45(rhs, 0.0, State<1>{std::log(r0)}, t, opt, [&](double, const State<1>& y, const State<1>&) {
        y_end = y[0];
        return true;
    });
    return std::exp(y_end);
}

CornerAngle corner_angle(const PatchState& state, double r) {
    require_radius(r);
    if (state.contours.empty()) throw DomainError("corner_angle: empty state");
    const auto& c = state.contours[0];
    std::vector<double> ang;
    if (!circle_crossings(c.nodes, r, ang))
        throw GeometryError("corner_angle: circle grazes the contour at r=" + std::to_string(r));
    if (ang.size() != 2)
        throw GeometryError("corner_angle: expected 2 crossings at r=" + std::to_string(r) + ", found " +
                            std::to_string(ang.size()));
    std::sort(ang.begin(), ang.end());
    double lo = ang[0], hi = ang[1];
    const double mid = 0.5 * (lo + hi);
    if (winding_number(c.nodes, {r * std::cos(mid), r * std::sin(mid)}) == 0) {
        lo = ang[1];
        hi = ang[0] + two_pi;
    }
    return {0.5 * (hi - lo), wrap_pi(0.5 * (lo + hi))};
}

DiagnosticsRow probe(const PatchState& state, const Trajectory& traj, double r, const ModelClock& clock) {
    DiagnosticsRow row{state.t, r, G_of(state, r), F_of(state, traj, r, clock),
                       theta_bar(state, traj, r, clock), std::numeric_limits<double>::quiet_NaN(),
                       std::numeric_limits<double>::quiet_NaN()};
    try {
        const CornerAngle a = corner_angle(state, r);
        row.half_angle = a.half_angle;
        row.bisector = a.bisector;
    } catch (const GeometryError&) {
        // the opening is undefined once the slice splits; the row keeps NaN
    }
    return row;
}

void write_diagnostics_csv(std::ostream& os, std::span<const DiagnosticsRow> rows) {
    csv::header(os, {"t", "r", "G", "F", "theta_bar", "half_angle", "bisector"});
    for (const auto& w : rows) csv::row(os, {w.t, w.r, w.G, w.F, w.theta_bar, w.half_angle, w.bisector});
}

void write_decomposition_csv(std::ostream& os, std::span<const DecompositionResidual> rows) {
    csv::header(os, {"r", "theta", "residual_over_r"});
    for (const auto& d : rows) csv::row(os, {d.r, d.theta, d.residual_over_r});
}

} // namespace cusplab
