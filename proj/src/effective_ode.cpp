#include "cusplab/effective_ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "cusplab/csv.hpp"
#include "cusplab/dopri.hpp"
#include "cusplab/errors.hpp"
#include "cusplab/hermite.hpp"

namespace cusplab {

namespace {

using std::numbers::pi;

// 1 - x cot x, accurate for small x.
double one_minus_xcotx(double x) {
    if (std::abs(x) < 0.2) {
        const double x2 = x * x;
        return x2 * (1.0 / 3 + x2 * (1.0 / 45 + x2 * (2.0 / 945 + x2 * (1.0 / 4725 + x2 * 2.0 / 93555))));
    }
    return 1.0 - x / std::tan(x);
}

// sin(4B)/B, accurate for small B.
double sin4_over(double B) {
    if (B < 1e-4) {
        const double y = 4 * B;
        return 4.0 * (1.0 - y * y / 6.0);
    }
    return std::sin(4 * B) / B;
}

/// Cumulative integration matrix on Chebyshev-Lobatto nodes mapped to [0, eps]:
/// (S v)_j = ∫_0^{τ_j} v dτ for the polynomial interpolant of v.
struct ChebyshevGrid {
    int n;
    std::vector<double> tau;
    std::vector<double> S; // (n+1) x (n+1), row-major

    ChebyshevGrid(int n_, double eps) : n(n_), tau(n_ + 1), S((n_ + 1) * (n_ + 1)) {
        const int m = n + 1;
        for (int j = 0; j < m; ++j) tau[j] = 0.5 * eps * (1.0 - std::cos(pi * j / n));
        tau[0] = 0.0;
        tau[n] = eps;
        std::vector<double> a(m), c(m + 1);
        for (int i = 0; i < m; ++i) {
            // coefficients of the unit vector e_i
            for (int k = 0; k < m; ++k) {
                double w = (i == 0 || i == n) ? 0.5 : 1.0;
                a[k] = 2.0 / n * w * std::cos(pi * i * k / n);
            }
            a[0] *= 0.5;
            a[n] *= 0.5;
            std::fill(c.begin(), c.end(), 0.0);
            c[1] += a[0];
            if (m > 1) c[2] += a[1] / 4.0;
            for (int k = 2; k < m; ++k) {
                c[k + 1] += a[k] / (2.0 * (k + 1));
                c[k - 1] -= a[k] / (2.0 * (k - 1));
            }
            double F1 = 0.0;
            for (int k = 0; k <= m; ++k) F1 += c[k];
            for (int j = 0; j < m; ++j) {
                double Fx = 0.0;
                for (int k = 0; k <= m; ++k) Fx += c[k] * std::cos(pi * j * k / n);
                S[j * m + i] = 0.5 * eps * (F1 - Fx);
            }
        }
    }

    std::vector<double> integrate(const std::vector<double>& v) const {
        const int m = n + 1;
        std::vector<double> out(m, 0.0);
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) s += S[j * m + i] * v[i];
            out[j] = s;
        }
        out[0] = 0.0;
        return out;
    }
};

EffectiveState state_from_vars(double tau, const State<4>& y) {
    // y = (A, ln B, A'/B, I)
    EffectiveState s;
    s.tau = tau;
    s.A = y[0];
    s.B = std::exp(y[1]);
    s.dA = y[2] * s.B;
    s.dB = -y[3] * s.B / tau;
    return s;
}

State<4> vars_rhs(double tau, const State<4>& y) {
    const double B = std::exp(y[1]);
    const double P = y[2];
    const double I = y[3];
    const double q = one_minus_xcotx(2 * B);        // 1 - 2B cot 2B
    const double Bcot = 0.5 * (1.0 - q);            // B cot 2B
    const double Btan = B * std::tan(2 * B);        // B tan 2B
    State<4> d;
    d[0] = P * B;
    d[1] = -I / tau;
    d[2] = (-P - sin4_over(B) / pi - 2 * I * P * (Bcot - Btan) + P * I) / tau;
    d[3] = I * I * q / tau + 2 * tau * std::tan(2 * B) * B * P * P;
    return d;
}

TrajectorySample make_sample(const EffectiveState& s, double I) {
    TrajectorySample out;
    out.s = s;
    out.I = I;
    out.dd = rhs(s);
    return out;
}

} // namespace

void validate(const ModelParams& p) {
    if (!(p.B0 > 0.0 && p.B0 < pi / 4))
        throw DomainError("B0 must lie in (0, pi/4), got " + std::to_string(p.B0));
    if (!(p.startup_eps > 0.0)) throw DomainError("startup_eps must be positive");
    if (!(p.rel_tol > 0.0) || !(p.abs_tol > 0.0)) throw DomainError("tolerances must be positive");
    if (!(p.tau_max > 0.0)) throw DomainError("tau_max must be positive");
    if (p.chebyshev_nodes < 4) throw DomainError("chebyshev_nodes must be at least 4");
    if (!(p.b_floor > 0.0)) throw DomainError("b_floor must be positive");
}

SecondDerivatives rhs(const EffectiveState& s) {
    if (!(s.tau > 0.0)) throw DomainError("rhs: tau must be positive");
    if (!(s.B > 0.0 && s.B < pi / 4)) throw DomainError("rhs: B must lie in (0, pi/4)");
    const double cot2 = 1.0 / std::tan(2 * s.B);
    const double tan2 = std::tan(2 * s.B);
    SecondDerivatives d;
    d.d2B = -s.dB / s.tau + 2 * cot2 * s.dB * s.dB - 2 * tan2 * s.dA * s.dA;
    d.d2A = -s.dA / s.tau - std::sin(4 * s.B) / (pi * s.tau) + 2 * (cot2 - tan2) * s.dA * s.dB;
    return d;
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(double B0, std::vector<TrajectorySample> samples, bool cusped)
    : B0_(B0), samples_(std::move(samples)), cusped_(cusped) {
    if (samples_.empty()) throw DomainError("trajectory needs at least one sample");
    for (std::size_t k = 1; k < samples_.size(); ++k)
        if (!(samples_[k].s.tau > samples_[k - 1].s.tau))
            throw DomainError("trajectory samples must have strictly increasing tau");
    cum_B_.assign(samples_.size(), 0.0);
    for (std::size_t k = 1; k < samples_.size(); ++k) {
        const auto& a = samples_[k - 1].s;
        const auto& b = samples_[k].s;
        cum_B_[k] = cum_B_[k - 1] + hermite::integral(b.tau - a.tau, {a.B, a.dB}, {b.B, b.dB});
    }
}

double Trajectory::tau_begin() const { return samples_.front().s.tau; }
double Trajectory::tau_end() const { return samples_.back().s.tau; }

std::size_t Trajectory::locate(double tau) const {
    if (samples_.empty() || tau < tau_begin() || tau > tau_end())
        throw DomainError("tau=" + std::to_string(tau) + " outside trajectory range");
    auto it = std::upper_bound(samples_.begin(), samples_.end(), tau,
                               [](double t, const TrajectorySample& s) { return t < s.s.tau; });
    std::size_t k = static_cast<std::size_t>(it - samples_.begin());
    if (k == 0) return 0;
    k -= 1;
    if (k + 1 >= samples_.size()) k = samples_.size() >= 2 ? samples_.size() - 2 : 0;
    return k;
}

EffectiveState Trajectory::at(double tau) const {
    const std::size_t k = locate(tau);
    if (samples_.size() == 1) return samples_[0].s;
    const auto& a = samples_[k];
    const auto& b = samples_[k + 1];
    const double h = b.s.tau - a.s.tau;
    const double u = (tau - a.s.tau) / h;
    EffectiveState s;
    s.tau = tau;
    s.A = hermite::value(h, {a.s.A, a.s.dA}, {b.s.A, b.s.dA}, u);
    s.B = hermite::value(h, {a.s.B, a.s.dB}, {b.s.B, b.s.dB}, u);
    s.dA = hermite::value(h, {a.s.dA, a.dd.d2A}, {b.s.dA, b.dd.d2A}, u);
    s.dB = hermite::value(h, {a.s.dB, a.dd.d2B}, {b.s.dB, b.dd.d2B}, u);
    return s;
}

double Trajectory::integral_B(double tau) const {
    const std::size_t k = locate(tau);
    if (samples_.size() == 1) return 0.0;
    const auto& a = samples_[k].s;
    const auto& b = samples_[k + 1].s;
    const double h = b.tau - a.tau;
    return cum_B_[k] + hermite::integral(h, {a.B, a.dB}, {b.B, b.dB}, (tau - a.tau) / h);
}

// ---------------------------------------------------------------------------

StartupResult startup(const ModelParams& p) {
    validate(p);
    const double eps = p.startup_eps;
    const double B0 = p.B0;
    const double c1 = std::sin(4 * B0) / pi;
    const ChebyshevGrid grid(p.chebyshev_nodes, eps);
    const int m = grid.n + 1;

    std::vector<double> g(m, 0.0), f(m, 0.0), h1(m), h2(m), h3(m);
    std::vector<double> gn(m), fn(m);
    double prev = 0.0;
    StartupResult res;
    res.eps = eps;

    constexpr int max_iter = 200;
    for (int it = 1; it <= max_iter; ++it) {
        const auto G = grid.integrate(g);
        for (int j = 0; j < m; ++j) {
            const double w = 2 * (G[j] + B0);
            const double ct = 1.0 / std::tan(w), tn = std::tan(w);
            const double a = f[j] - c1;
            const double s = grid.tau[j];
            h1[j] = 2 * s * (ct * g[j] * g[j] - tn * a * a);
            h2[j] = 2 * s * a * g[j] * (ct - tn);
            h3[j] = (std::sin(2 * w) - std::sin(4 * B0)) / pi;
        }
        const auto I1 = grid.integrate(h1);
        const auto I2 = grid.integrate(h2);
        const auto I3 = grid.integrate(h3);
        double diff = 0.0, scale = 0.0;
        for (int j = 0; j < m; ++j) {
            const double s = grid.tau[j];
            gn[j] = j == 0 ? 0.0 : I1[j] / s;
            fn[j] = j == 0 ? 0.0 : (I2[j] - I3[j]) / s;
            diff = std::max({diff, std::abs(gn[j] - g[j]), std::abs(fn[j] - f[j])});
            scale = std::max({scale, std::abs(gn[j]), std::abs(fn[j])});
        }
        g.swap(gn);
        f.swap(fn);
        res.iterations = it;
        const double noise = 64 * 2.2e-16 * std::max(scale, 1e-300);
        if (it >= 2 && prev > noise) {
            const double ratio = diff / prev;
            res.contraction = std::max(res.contraction, ratio);
            if (ratio >= 1.0)
                throw ConvergenceError("startup: Picard map not contracting (factor " +
                                       std::to_string(ratio) + ") at eps=" + std::to_string(eps));
        }
        if (diff <= noise) break;
        if (it == max_iter)
            throw ConvergenceError("startup: no convergence in " + std::to_string(max_iter) +
                                   " iterations at eps=" + std::to_string(eps));
        prev = diff;
    }

    std::vector<double> dA(m);
    for (int j = 0; j < m; ++j) dA[j] = f[j] - c1;
    const auto A = grid.integrate(dA);
    const auto G = grid.integrate(g);

    res.samples.reserve(m);
    for (int j = 0; j < m; ++j) {
        EffectiveState s{grid.tau[j], A[j], B0 + G[j], dA[j], g[j]};
        if (j == 0) {
            TrajectorySample t0;
            t0.s = s;
            t0.dd.d2A = 0.0;
            t0.dd.d2B = -std::tan(2 * B0) * c1 * c1;
            t0.I = 0.0;
            res.samples.push_back(t0);
        } else {
            res.samples.push_back(make_sample(s, -s.tau * s.dB / s.B));
        }
    }
    return res;
}

Trajectory integrate(const ModelParams& p_in) {
    validate(p_in);
    ModelParams p = p_in;
    p.startup_eps = std::min(p.startup_eps, 0.5 * p.tau_max);

    StartupResult st;
    bool ok = false;
    for (int halvings = 0; halvings < 40; ++halvings) {
        try {
            st = startup(p);
            if (st.contraction < 0.5) {
                ok = true;
                break;
            }
        } catch (const ConvergenceError&) {
        }
        p.startup_eps *= 0.5;
    }
    if (!ok) throw ConvergenceError("startup: contraction factor never fell below 1/2");

    std::vector<TrajectorySample> samples = std::move(st.samples);
    const auto& last = samples.back();
    State<4> y{last.s.A, std::log(last.s.B), last.s.dA / last.s.B, last.I};
    bool cusped = false;

    if (p.tau_max > st.eps) {
        DopriOptions opt;
        opt.rel_tol = p.rel_tol;
        opt.abs_tol = p.abs_tol;
        opt.h_init = 0.1 * st.eps;
        dopri45(vars_rhs, st.eps, y, p.tau_max, opt,
                   [&](double tau, const State<4>& yy, const State<4>&) {
                       const EffectiveState s = state_from_vars(tau, yy);
                       if (!(s.B > 0.0) || s.B > p.B0 * (1 + 1e-12))
                           throw InvariantViolation("B in (0, B0]",
                                                    "B=" + std::to_string(s.B) + " at tau=" +
                                                        std::to_string(tau));
                       samples.push_back(make_sample(s, yy[3]));
                       if (s.B < p.b_floor) {
                           cusped = true;
                           return false;
                       }
                       return true;
                   });
    }

    Trajectory traj(p.B0, std::move(samples), cusped);
    traj.startup_end = st.eps;
    traj.startup_contraction = st.contraction;
    traj.startup_iterations = st.iterations;
    return traj;
}

// ---------------------------------------------------------------------------

double q_of(const EffectiveState& s) {
    if (s.tau < 0) throw DomainError("q_of: tau must be non-negative");
    if (s.tau == 0.0) return 0.0;
    if (!(s.B > 0.0)) throw DomainError("q_of: B must be positive");
    return -s.tau * s.dA / s.B;
}

double decay_order(const EffectiveState& s) {
    if (s.tau < 0) throw DomainError("decay_order: tau must be non-negative");
    if (s.tau == 0.0) return 0.0;
    if (!(s.B > 0.0)) throw DomainError("decay_order: B must be positive");
    return -s.tau * s.dB / s.B;
}

namespace {
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}
} // namespace

DecayFit estimate_delta(const Trajectory& traj, double tau_lo, double tau_hi) {
    if (!(tau_lo > 0.0 && tau_hi > tau_lo))
        throw DomainError("estimate_delta: need 0 < tau_lo < tau_hi");
    if (traj.size() == 0 || tau_lo < traj.tau_begin() || tau_hi > traj.tau_end())
        throw DomainError("estimate_delta: window not covered by the trajectory");
    std::vector<double> lt, lb, ldb;
    for (const auto& smp : traj.samples()) {
        const auto& s = smp.s;
        if (s.tau < tau_lo || s.tau > tau_hi) continue;
        if (!(s.B > 0.0) || s.dB == 0.0) continue;
        lt.push_back(std::log(s.tau));
        lb.push_back(std::log(s.B));
        ldb.push_back(std::log(std::abs(s.dB)));
    }
    if (lt.size() < 8)
        throw DomainError("estimate_delta: insufficient samples in window (" +
                          std::to_string(lt.size()) + ")");
    DecayFit fit;
    fit.slope_B = ls_slope(lt, lb);
    fit.slope_dB = ls_slope(lt, ldb);
    fit.delta = -fit.slope_B - 1.0;
    fit.points = static_cast<int>(lt.size());
    fit.tau_lo = tau_lo;
    fit.tau_hi = tau_hi;
    return fit;
}

LimitA limit_A(const Trajectory& traj, double tol) {
    const auto smp = traj.samples();
    if (smp.size() < 2) throw DomainError("limit_A: trajectory too short");
    const double t_hi = traj.tau_end();
    const double t_lo = std::max(traj.tau_begin(), 0.1 * t_hi);
    double var = 0.0;
    for (std::size_t k = 1; k < smp.size(); ++k) {
        const auto& a = smp[k - 1].s;
        const auto& b = smp[k].s;
        if (b.tau <= t_lo) continue;
        const double lo = std::max(a.tau, t_lo);
        const double ua = (lo - a.tau) / (b.tau - a.tau);
        const double h = b.tau - a.tau;
        // |A'| does not change sign within a step in practice; integrate the Hermite piece of A'.
        const double full = hermite::integral(h, {a.dA, smp[k - 1].dd.d2A}, {b.dA, smp[k].dd.d2A});
        const double head = hermite::integral(h, {a.dA, smp[k - 1].dd.d2A}, {b.dA, smp[k].dd.d2A}, ua);
        var += std::abs(full - head);
    }
    LimitA out{smp.back().s.A, var};
    if (var > tol)
        throw ConvergenceError("limit_A: tail variation " + std::to_string(var) +
                               " over the last decade exceeds " + std::to_string(tol));
    return out;
}

TrajectoryAudit audit(const Trajectory& traj, double slack) {
    TrajectoryAudit a;
    const auto smp = traj.samples();
    if (smp.empty()) return a;
    const double B0 = traj.B0();
    const double lo = std::sin(4 * B0) / (pi * B0), hi = 4 / pi;
    a.q_rate_min = std::numeric_limits<double>::infinity();
    a.q_rate_max = -a.q_rate_min;
    for (std::size_t k = 0; k < smp.size(); ++k) {
        const auto& s = smp[k].s;
        a.identity_max = std::max(a.identity_max, std::abs(pi * s.dA + std::sin(4 * s.B)));
        if (k > 0) {
            if (s.B > smp[k - 1].s.B * (1 + slack)) a.B_nonincreasing = false;
            if (smp[k].I < smp[k - 1].I - slack) a.I_nondecreasing = false;
            if (a.I_crossing < 0 && smp[k - 1].I < 1.0 && smp[k].I >= 1.0) {
                const double u = (1.0 - smp[k - 1].I) / (smp[k].I - smp[k - 1].I);
                a.I_crossing = smp[k - 1].s.tau + u * (s.tau - smp[k - 1].s.tau);
            }
        }
        if (s.tau > 0.0) {
            const double q = -s.dA / s.B;
            a.q_rate_min = std::min(a.q_rate_min, q);
            a.q_rate_max = std::max(a.q_rate_max, q);
            if (q < lo * (1 - slack) || q > hi * (1 + slack)) a.q_rate_in_range = false;
        }
    }
    return a;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    csv::header(os, {"tau", "A", "B", "dA", "dB", "Q", "I"});
    for (const auto& smp : traj.samples()) {
        const auto& s = smp.s;
        csv::row(os, {s.tau, s.A, s.B, s.dA, s.dB, q_of(s), smp.I});
    }
}

} // namespace cusplab
