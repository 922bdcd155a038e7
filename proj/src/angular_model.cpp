#include "cusplab/angular_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "cusplab/csv.hpp"
#include "cusplab/dopri.hpp"
#include "cusplab/errors.hpp"
#include "cusplab/hermite.hpp"

namespace cusplab {

namespace {
using std::numbers::pi;
constexpr double two_pi = 2 * pi;
} // namespace

JRates j_rates(const EffectiveState& s) {
    const double w = 2 * std::sin(2 * s.B);
    return {w * std::sin(2 * s.A), w * std::cos(2 * s.A)};
}

// ---------------------------------------------------------------------------

AngularDensity AngularDensity::empty() { return {}; }

AngularDensity AngularDensity::full() {
    AngularDensity g;
    g.full_ = true;
    return g;
}

AngularDensity AngularDensity::patch(double A, double B) {
    if (!(B > 0.0)) return empty();
    if (B >= pi / 2) return full();
    return from_arcs({{A - B, A + B}}, true);
}

AngularDensity AngularDensity::from_arcs(std::vector<Interval> arcs, bool two_fold) {
    AngularDensity g;
    for (const auto& a : arcs)
        if (!(a.hi > a.lo) || a.hi - a.lo >= two_pi)
            throw DomainError("AngularDensity: arcs need lo < hi < lo + 2pi");
    g.two_fold_ = two_fold;
    g.arcs_ = std::move(arcs);
    if (two_fold) {
        const std::size_t n = g.arcs_.size();
        for (std::size_t i = 0; i < n; ++i) g.arcs_.push_back({g.arcs_[i].lo + pi, g.arcs_[i].hi + pi});
    }
    return g;
}

double AngularDensity::measure() const {
    if (full_) return two_pi;
    double m = 0.0;
    for (const auto& a : arcs_) m += a.hi - a.lo;
    return m;
}

bool AngularDensity::contains(double theta) const {
    if (full_) return true;
    for (const auto& a : arcs_) {
        const double d = theta - a.lo - two_pi * std::floor((theta - a.lo) / two_pi);
        if (d <= a.hi - a.lo) return true;
    }
    return false;
}

JRates AngularDensity::moments() const {
    if (full_) return {};
    JRates m;
    for (const auto& a : arcs_) {
        m.s += 0.5 * (std::cos(2 * a.lo) - std::cos(2 * a.hi));
        m.c += 0.5 * (std::sin(2 * a.hi) - std::sin(2 * a.lo));
    }
    return m;
}

// Rebuild a density of the same shape from evolved generating arcs.
AngularDensity evolve_arcs(const AngularDensity& g0, std::vector<Interval> gen) {
    AngularDensity g;
    g.two_fold_ = g0.two_fold_;
    for (const auto& a : gen)
        if (a.hi - a.lo > 0.0) g.arcs_.push_back(a);
    if (g.two_fold_) {
        const std::size_t n = g.arcs_.size();
        for (std::size_t i = 0; i < n; ++i) g.arcs_.push_back({g.arcs_[i].lo + pi, g.arcs_[i].hi + pi});
    }
    return g;
}

// ---------------------------------------------------------------------------

namespace {
JRates j_rate_slopes(const EffectiveState& s) {
    const double s2A = std::sin(2 * s.A), c2A = std::cos(2 * s.A);
    const double s2B = std::sin(2 * s.B), c2B = std::cos(2 * s.B);
    return {4 * c2A * s.dA * s2B + 4 * s2A * c2B * s.dB, -4 * s2A * s.dA * s2B + 4 * c2A * c2B * s.dB};
}
} // namespace

JIntegrals::JIntegrals(const Trajectory& traj) {
    const auto smp = traj.samples();
    if (smp.empty()) throw DomainError("JIntegrals: empty trajectory");
    if (smp.front().s.tau != 0.0) throw DomainError("JIntegrals: trajectory must start at tau=0");
    for (const auto& x : smp) {
        tau_.push_back(x.s.tau);
        rate_.push_back(j_rates(x.s));
        drate_.push_back(j_rate_slopes(x.s));
    }
    cum_.assign(tau_.size(), JRates{});
    for (std::size_t k = 1; k < tau_.size(); ++k) {
        const double h = tau_[k] - tau_[k - 1];
        cum_[k].s = cum_[k - 1].s + hermite::integral(h, {rate_[k - 1].s, drate_[k - 1].s}, {rate_[k].s, drate_[k].s});
        cum_[k].c = cum_[k - 1].c + hermite::integral(h, {rate_[k - 1].c, drate_[k - 1].c}, {rate_[k].c, drate_[k].c});
    }
}

JRates JIntegrals::at(double tau) const {
    if (tau < 0.0 || tau > tau_.back())
        throw DomainError("JIntegrals: tau=" + std::to_string(tau) + " outside trajectory range");
    if (tau_.size() == 1) return {};
    auto it = std::upper_bound(tau_.begin(), tau_.end(), tau);
    std::size_t k = it == tau_.begin() ? 0 : static_cast<std::size_t>(it - tau_.begin()) - 1;
    if (k + 1 >= tau_.size()) k = tau_.size() - 2;
    const double h = tau_[k + 1] - tau_[k];
    const double u = (tau - tau_[k]) / h;
    return {cum_[k].s + hermite::integral(h, {rate_[k].s, drate_[k].s}, {rate_[k + 1].s, drate_[k + 1].s}, u),
            cum_[k].c + hermite::integral(h, {rate_[k].c, drate_[k].c}, {rate_[k + 1].c, drate_[k + 1].c}, u)};
}

JRates JIntegrals::mean(double tau) const {
    if (tau == 0.0) return rate_.front();
    const JRates J = at(tau);
    return {J.s / tau, J.c / tau};
}

// ---------------------------------------------------------------------------

ResidualProfile integral_residual(const Trajectory& traj, double tau_hi, double max_spacing) {
    const JIntegrals J(traj);
    ResidualProfile out;
    double scale_B = 0.0, scale_A = 0.0, worst_B = 0.0, worst_A = 0.0;
    const auto smp = traj.samples();
    for (std::size_t k = 0; k < smp.size(); ++k) {
        const auto& s = smp[k].s;
        if (s.tau > tau_hi) break;
        if (k > 0 && s.tau - smp[k - 1].s.tau > max_spacing)
            throw DomainError("integral_residual: sample spacing " +
                              std::to_string(s.tau - smp[k - 1].s.tau) + " exceeds " +
                              std::to_string(max_spacing) + " near tau=" + std::to_string(s.tau));
        const JRates j = J.at(s.tau);
        const double X1 = 0.5 * j.s, X2 = 0.5 * j.c;
        const double s2A = std::sin(2 * s.A), c2A = std::cos(2 * s.A);
        const double rB = s.tau * s.dB + kIntegralCoupling * std::sin(2 * s.B) * (c2A * X1 - s2A * X2);
        const double rA = s.tau * s.dA + kIntegralCoupling * std::cos(2 * s.B) * (s2A * X1 + c2A * X2);
        out.tau.push_back(s.tau);
        out.res_B.push_back(rB);
        out.res_A.push_back(rA);
        scale_B = std::max(scale_B, std::abs(s.tau * s.dB));
        scale_A = std::max(scale_A, std::abs(s.tau * s.dA));
        worst_B = std::max(worst_B, std::abs(rB));
        worst_A = std::max(worst_A, std::abs(rA));
    }
    out.max_rel_B = scale_B > 0 ? worst_B / scale_B : worst_B;
    out.max_rel_A = scale_A > 0 ? worst_A / scale_A : worst_A;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> generating_endpoints(const AngularDensity& g) {
    const auto arcs = g.arcs();
    const std::size_t n = g.two_fold() ? arcs.size() / 2 : arcs.size();
    std::vector<double> y;
    for (std::size_t i = 0; i < n; ++i) {
        y.push_back(arcs[i].lo);
        y.push_back(arcs[i].hi);
    }
    return y;
}

std::vector<Interval> arcs_from_endpoints(const std::vector<double>& y, std::size_t count,
                                          double merge_length) {
    std::vector<Interval> out;
    for (std::size_t i = 0; i < count; ++i) {
        const Interval a{y[2 * i], y[2 * i + 1]};
        if (a.hi - a.lo >= merge_length) out.push_back(a);
    }
    return out;
}

double endpoint_speed(double theta, JRates K) {
    return -kTransportCoupling * (std::sin(2 * theta) * K.s + std::cos(2 * theta) * K.c);
}

} // namespace

AngularDensity transport_evolve(const AngularDensity& g0, const Trajectory& traj, double tau_end,
                                const TransportOptions& opt) {
    if (tau_end < 0.0) throw DomainError("transport_evolve: tau_end must be non-negative");
    if (tau_end > traj.tau_end())
        throw DomainError("transport_evolve: tau_end beyond trajectory range");
    if (g0.is_full() || g0.arcs().empty() || tau_end == 0.0) return g0;

    const JIntegrals J(traj);
    std::vector<double> y = generating_endpoints(g0);
    const std::size_t count = y.size() / 2;
    DopriOptions o;
    o.rel_tol = opt.rel_tol;
    o.abs_tol = opt.abs_tol;
    o.h_init = std::min(1e-4, 0.01 * tau_end);
    auto f = [&](double tau, const std::vector<double>& th) {
        const JRates K = J.mean(tau);
        std::vector<double> d(th.size());
        for (std::size_t i = 0; i < th.size(); ++i) d[i] = endpoint_speed(th[i], K);
        return d;
    };
    dopri45(f, 0.0, y, tau_end, o, [&](double, const std::vector<double>& yy, const std::vector<double>&) {
        y = yy;
        return true;
    });
    return evolve_arcs(g0, arcs_from_endpoints(y, count, opt.merge_length));
}

AngularDensity transport_evolve_self_consistent(const AngularDensity& g0, double tau_end,
                                                const TransportOptions& opt) {
    if (tau_end < 0.0) throw DomainError("transport_evolve: tau_end must be non-negative");
    if (g0.is_full() || g0.arcs().empty() || tau_end == 0.0) return g0;

    std::vector<double> y = generating_endpoints(g0);
    const std::size_t count = y.size() / 2;
    const bool two_fold = g0.two_fold();
    const JRates M0 = g0.moments();
    y.push_back(M0.s);
    y.push_back(M0.c);
    const std::size_t nk = y.size() - 2;

    auto moments_of = [&](const std::vector<double>& th) {
        JRates m;
        const double mult = two_fold ? 2.0 : 1.0; // the π-shifted copy has identical moments
        for (std::size_t i = 0; i < count; ++i) {
            m.s += mult * 0.5 * (std::cos(2 * th[2 * i]) - std::cos(2 * th[2 * i + 1]));
            m.c += mult * 0.5 * (std::sin(2 * th[2 * i + 1]) - std::sin(2 * th[2 * i]));
        }
        return m;
    };
    auto f = [&](double tau, const std::vector<double>& v) {
        const JRates K{v[nk], v[nk + 1]};
        std::vector<double> d(v.size());
        for (std::size_t i = 0; i < nk; ++i) d[i] = endpoint_speed(v[i], K);
        const JRates M = moments_of(v);
        d[nk] = (M.s - K.s) / tau;
        d[nk + 1] = (M.c - K.c) / tau;
        return d;
    };
    // K(τ) - K(0) = O(τ), and an error in K decays like 1/τ, so a start at a tiny τ is harmless.
    const double tau0 = 1e-12 * std::max(tau_end, 1.0);
    DopriOptions o;
    o.rel_tol = opt.rel_tol;
    o.abs_tol = opt.abs_tol;
    o.h_init = tau0;
    o.min_rel_step = 1e-15;
    dopri45(f, tau0, y, tau_end, o, [&](double, const std::vector<double>& yy, const std::vector<double>&) {
        y = yy;
        return true;
    });
    y.resize(nk);
    return evolve_arcs(g0, arcs_from_endpoints(y, count, opt.merge_length));
}

void write_angular_csv(std::ostream& os, const AngularDensity& g0, const Trajectory& traj,
                       std::span<const double> taus) {
    const std::size_t n_end = 2 * g0.arcs().size();
    os << "tau,Js,Jc";
    for (std::size_t i = 0; i < n_end; ++i) os << ",theta_" << i;
    os << '\n';
    const JIntegrals J(traj);
    for (double tau : taus) {
        const AngularDensity g = transport_evolve(g0, traj, tau);
        const JRates j = J.at(tau);
        std::vector<double> row{tau, j.s, j.c};
        for (const auto& a : g.arcs()) {
            row.push_back(a.lo);
            row.push_back(a.hi);
        }
        row.resize(3 + n_end, std::numeric_limits<double>::quiet_NaN());
        csv::row(os, row);
    }
}

} // namespace cusplab
