// One PASS/FAIL line per acceptance criterion; non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cusplab/angular_model.hpp"
#include "cusplab/bounds_lab.hpp"
#include "cusplab/diagnostics.hpp"
#include "cusplab/effective_ode.hpp"
#include "cusplab/errors.hpp"
#include "cusplab/euler_patch.hpp"
#include "cusplab/geometry.hpp"

using namespace cusplab;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= limit_s) {
        o.pass = false;
        o.detail += fmt("; runtime limit %.0f s exceeded", limit_s);
    }
    std::printf("%s  %2d  %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

void info(const std::string& s) {
    std::printf("      info: %s\n", s.c_str());
    std::fflush(stdout);
}

Trajectory model(double B0, double tau_max) {
    ModelParams p;
    p.B0 = B0;
    p.tau_max = tau_max;
    return integrate(p);
}

// A ≡ 0, B ≡ B0.
Trajectory frozen(double B0, double tau_end, int n = 2001) {
    std::vector<TrajectorySample> s(n);
    for (int i = 0; i < n; ++i) s[i].s = {tau_end * i / (n - 1), 0.0, B0, 0.0, 0.0};
    return Trajectory(B0, std::move(s));
}

const std::vector<double> kAngles{pi / 16, pi / 8, pi / 6, 0.24 * pi};

// ---------------------------------------------------------------------------

Outcome identity() {
    double worst = 0.0;
    std::string ends;
    for (double B0 : kAngles) {
        const Trajectory traj = model(B0, 1e4);
        worst = std::max(worst, audit(traj).identity_max);
        ends += fmt(" %.3g%s", traj.tau_end(), traj.numerically_cusped() ? "(floor)" : "");
    }
    return {worst < 1e-7, fmt("max |pi A' + sin 4B| = %.2e (< 1e-7); tau_end:", worst) + ends};
}

Outcome monotonicity() {
    int ok = 0;
    double lo_margin = 1e300, hi_margin = 1e300;
    for (double B0 : kAngles) {
        const TrajectoryAudit a = audit(model(B0, 1e4), 1e-10);
        if (a.B_nonincreasing && a.I_nondecreasing && a.q_rate_in_range) ++ok;
        lo_margin = std::min(lo_margin, a.q_rate_min - std::sin(4 * B0) / (pi * B0));
        hi_margin = std::min(hi_margin, 4 / pi - a.q_rate_max);
    }
    return {ok == static_cast<int>(kAngles.size()),
            fmt("all checks hold for %d of %zu initial angles; Q/tau margin to the bounds: %.2e below, %.2e above", ok,
                kAngles.size(), lo_margin, hi_margin)};
}

Outcome decay() {
    const Trajectory traj = model(pi / 8, 1e6);
    const DecayFit fit = estimate_delta(traj, 1e3, 1e6);
    const TrajectoryAudit a = audit(traj);
    const bool ok = fit.delta > 0 && fit.slope_dB <= -2 - fit.delta + 0.1 && a.I_crossing > 0;
    return {ok, fmt("B0 = pi/8: delta = %.4f, slope |B'| = %.4f (bound %.4f), I = 1 at tau = %.4g", fit.delta,
                    fit.slope_dB, -2 - fit.delta + 0.1, a.I_crossing)};
}

Outcome oracles() {
    double res = 0.0, ends = 0.0;
    for (double B0 : kAngles) {
        const Trajectory traj = model(B0, 10);
        res = std::max(res, integral_residual(traj, 10.0).max_relative());
        const auto g = transport_evolve(AngularDensity::patch(0.0, B0), traj, 5.0);
        if (g.arcs().size() != 2) return {false, fmt("transport split the patch for B0 = %.4f", B0)};
        const EffectiveState s = traj.at(5.0);
        ends = std::max({ends, std::abs(g.arcs()[0].lo - (s.A - s.B)), std::abs(g.arcs()[0].hi - (s.A + s.B))});
    }
    return {res < 1e-6 && ends < 1e-6,
            fmt("integral-system residual %.2e (< 1e-6), transport endpoint error %.2e (< 1e-6)", res, ends)};
}

Outcome benchmarks() {
    CDConfig cfg;
    cfg.remesh = false;
    cfg.symmetrize = false;

    PatchState disc = make_disc(1.0, 256);
    cfg.dt = 0.01;
    const long turn = std::lround(4 * pi / cfg.dt);
    for (long i = 0; i < turn; ++i) advance(disc, cfg);
    double drift = 0.0;
    for (const auto& p : disc.contours[0].nodes) drift = std::max(drift, std::abs(norm(p) - 1.0));

    PatchState ell = make_ellipse(2.0, 1.0, 512);
    cfg.dt = 0.025;
    for (int i = 0; i < 200; ++i) advance(ell, cfg);
    const double rate = principal_axis_angle(ell.contours[0].nodes) / ell.t;
    const double rel = std::abs(rate / (2.0 / 9.0) - 1.0);

    return {drift < 1e-4 && rel < 0.01,
            fmt("disc radial drift %.2e after t = %.3f (< 1e-4); ellipse rate %.6f, off 2/9 by %.3f%% (< 1%%)", drift,
                disc.t, rate, 100 * rel)};
}

// Corner run shared by the physics, perturbation-bound and decomposition checks.
struct CornerRun {
    std::vector<double> radii{1e-2, 1e-3};
    std::vector<double> t;
    std::vector<std::vector<double>> half, bisector, F, G, Gmodel;
    double area_drift = 0.0;
    double symmetry = 0.0;
    PatchState final_state;
};

CornerRun corner_run(std::size_t n_nodes, double dt, const Trajectory* traj, const ModelClock& clock) {
    CornerRun out;
    const std::size_t nr = out.radii.size();
    out.half.resize(nr);
    out.bisector.resize(nr);
    out.F.resize(nr);
    out.G.resize(nr);
    out.Gmodel.resize(nr);

    PatchState s = make_corner_patch(pi / 8, 0.99, n_nodes);
    CDConfig cfg;
    cfg.n_nodes = n_nodes;
    cfg.dt = dt;
    const double area0 = total_area(s);
    const long steps = std::lround(0.5 / dt), stride = std::lround(0.01 / dt);
    for (long i = 0; i <= steps; ++i) {
        if (i > 0) {
            advance(s, cfg);
            out.area_drift = std::max(out.area_drift, std::abs(total_area(s) - area0) / area0);
            out.symmetry = std::max(out.symmetry, symmetry_error(s));
        }
        if (i % stride != 0) continue;
        out.t.push_back(s.t);
        for (std::size_t k = 0; k < nr; ++k) {
            const double r = out.radii[k];
            if (traj) {
                const DiagnosticsRow row = probe(s, *traj, r, clock);
                out.half[k].push_back(row.half_angle);
                out.bisector[k].push_back(row.bisector);
                out.F[k].push_back(row.F);
                out.G[k].push_back(row.G);
                out.Gmodel[k].push_back(model_G(*traj, s.t, r, clock));
            } else {
                double h = std::numeric_limits<double>::quiet_NaN(), b = h;
                try {
                    const CornerAngle a = corner_angle(s, r);
                    h = a.half_angle;
                    b = a.bisector;
                } catch (const GeometryError&) {
                }
                out.half[k].push_back(h);
                out.bisector[k].push_back(b);
            }
        }
    }
    out.final_state = std::move(s);
    return out;
}

// Linear interpolation of y(x) on increasing x; nullopt outside the range.
std::optional<double> interp(const std::vector<double>& x, const std::vector<double>& y, double at) {
    if (x.empty() || at < x.front() || at > x.back()) return std::nullopt;
    const auto it = std::upper_bound(x.begin(), x.end(), at);
    if (it == x.end()) return y.back();
    const std::size_t j = it - x.begin();
    const double w = (at - x[j - 1]) / (x[j] - x[j - 1]);
    return (1 - w) * y[j - 1] + w * y[j];
}

std::optional<CornerRun> shared_run;
std::optional<Trajectory> shared_traj;
const ModelClock kClock{0.5};

Outcome corner_physics() {
    shared_traj = model(pi / 8, 1e4);
    shared_run = corner_run(1024, 1e-3, &*shared_traj, kClock);
    const CornerRun& run = *shared_run;
    const std::size_t nt = run.t.size();

    bool decreasing = true;
    for (std::size_t k = 0; k < run.radii.size(); ++k)
        for (std::size_t j = 1; j < nt; ++j)
            decreasing = decreasing && std::isfinite(run.half[k][j]) && run.half[k][j] < run.half[k][j - 1];

    // Both curves against τ = t|ln r|; the finer radius is interpolated at the coarser one's τ.
    std::vector<std::vector<double>> tau(run.radii.size());
    for (std::size_t k = 0; k < run.radii.size(); ++k)
        for (double t : run.t) tau[k].push_back(t * std::abs(std::log(run.radii[k])));
    double overlay = 0.0;
    for (std::size_t j = 1; j < nt && tau[0][j] <= 2.0; ++j)
        if (const auto other = interp(tau[1], run.half[1], tau[0][j]))
            overlay = std::max(overlay, std::abs(run.half[0][j] - *other) / *other);

    double track = 0.0, track_all = 0.0;
    for (std::size_t k = 0; k < run.radii.size(); ++k)
        for (std::size_t j = 1; j < nt; ++j) {
            const double B = shared_traj->at(kClock.ratio * tau[k][j]).B;
            const double e = std::abs(run.half[k][j] - B) / B;
            track_all = std::max(track_all, e);
            if (tau[k][j] <= 2.0) track = std::max(track, e);
        }

    bool drift_negative = true;
    for (std::size_t k = 0; k < run.radii.size(); ++k) drift_negative = drift_negative && run.bisector[k].back() < 0;

    info(fmt("1024 nodes, dt 1e-3: max area drift %.2e, max symmetry error %.2e", run.area_drift, run.symmetry));
    info(fmt("half-angle at t = 0.5: %.5f (r = 1e-2), %.5f (r = 1e-3); bisector %.5f, %.5f", run.half[0].back(),
             run.half[1].back(), run.bisector[0].back(), run.bisector[1].back()));
    info(fmt("model tracking over the whole run (tau up to %.2f): %.1f%%", tau[1].back(), 100 * track_all));
    return {decreasing && overlay < 0.15 && track < 0.2 && drift_negative,
            fmt("half-angle strictly decreasing: %s; overlay %.1f%% (< 15%%); model tracking %.1f%% (< 20%%) "
                "for tau <= 2; bisector drift negative: %s",
                decreasing ? "yes" : "no", 100 * overlay, 100 * track, drift_negative ? "yes" : "no")};
}

void resolution_study() {
    if (!shared_run) return;
    const CornerRun coarse = corner_run(512, 2e-3, nullptr, kClock);
    double diff = 0.0;
    for (std::size_t k = 0; k < coarse.radii.size(); ++k)
        for (std::size_t j = 0; j < coarse.t.size(); ++j)
            diff = std::max(diff, std::abs(coarse.half[k][j] - shared_run->half[k][j]));
    info(fmt("resolution study: 512 nodes / dt 2e-3 vs 1024 / 1e-3, max half-angle difference %.2e rad", diff));
}

Outcome perturbation_bound() {
    if (!shared_run) return {false, "corner run unavailable"};
    const CornerRun& run = *shared_run;
    double C = 0.0;
    long misses = 0;
    for (std::size_t k = 0; k < run.radii.size(); ++k)
        for (std::size_t j = 0; j < run.t.size(); ++j) {
            if (run.t[j] > 0)
                C = std::max(C, (run.F[k][j] - run.F[k][0]) / (run.t[j] * std::abs(std::log(run.radii[k]))));
            if (run.G[k][j] > run.F[k][j] + run.Gmodel[k][j] + 1e-12) ++misses;
        }
    info(fmt("G <= F + G_model violated at %ld of %zu probes", misses, run.t.size() * run.radii.size()));
    return {C < 50, fmt("fitted C = %.4f (< 50)", C)};
}

Outcome flow_map_check() {
    const double Cs = 1.0;
    double worst = 0.0;
    for (double B0 : {pi / 16, pi / 8, 0.2}) {
        const Trajectory traj = frozen(B0, 40.0);
        for (double r0 : {0.5, 0.1, 1e-2})
            for (double t : {0.1, 0.5, 1.0, 2.0}) {
                const double exact = std::pow(r0, std::exp(Cs * B0 * t));
                worst = std::max(worst, std::abs(flow_map(Cs, traj, r0, t) - exact) / exact);
            }
    }
    const double B0 = pi / 8;
    const Trajectory traj = model(B0, 1e4);
    bool sandwich = true;
    for (double r0 : {0.5, 1e-1, 1e-2, 1e-3, 1e-4})
        for (double t : {0.05, 0.1, 0.25, 0.5, 1.0, 2.0}) {
            const double phi = flow_map(Cs, traj, r0, t);
            sandwich = sandwich && phi <= r0 && phi >= std::pow(r0, std::exp(Cs * B0 * t));
        }
    return {worst < 1e-8 && sandwich,
            fmt("constant-B relative error %.2e (< 1e-8); Yudovich sandwich on a 5x6 (r, t) grid: %s", worst,
                sandwich ? "holds" : "violated")};
}

double worst_excess(const BoundParams& p, int m, LogRadius r, double t_max,
                    double (*bound)(const BoundParams&, int, double, LogRadius)) {
    const GridFunction g = iterate_F(p, m, make_grid(t_max, 257, {r}));
    double worst = -1e300;
    for (std::size_t j = 0; j < g.t.size(); ++j) worst = std::max(worst, g.values[0][j] - bound(p, m, g.t[j], r));
    return worst;
}

Outcome bounds() {
    const BoundParams p;
    double literal = -1e300, corrected = -1e300;
    int bad_k = 0;
    for (int k = 1; k <= 6; ++k) {
        const LogRadius r{std::pow(10.0, k)};
        const double eta = choose_parameters(p, r).eta;
        for (int m = 1; m <= 32; ++m) {
            const double e = worst_excess(p, m, r, eta, closed_form);
            if (e > 0 && bad_k == 0) bad_k = k;
            literal = std::max(literal, e);
            corrected = std::max(corrected, worst_excess(p, m, r, eta, closed_form_stirling_corrected));
        }
    }
    const bool part1 = literal <= 0;

    bool part2 = true;
    for (int i = 0; i <= 4900; ++i) {
        const double xi = 1.0 + 0.01 * i;
        const int m = static_cast<int>(std::ceil(std::numbers::e * xi));
        part2 = part2 && m * std::log(xi / m) <= -xi;
    }

    bool part3 = true;
    double prev_eta_L = 0.0, prev_decay = 1e300, first_decay = 0.0, last_decay = 0.0;
    for (int k = 1; k <= 6; ++k) {
        const LogRadius r{std::pow(10.0, k)};
        const double etaL = choose_parameters(p, r).eta * r.L, d = decay_F(p, r);
        part3 = part3 && etaL > prev_eta_L && d < prev_decay;
        if (k == 1) first_decay = d;
        last_decay = d;
        prev_eta_L = etaL;
        prev_decay = d;
    }
    part3 = part3 && last_decay < 0.1 * first_decay;

    info(fmt("(e x/m)^m form: worst excess %.3e over the same grid", corrected));
    return {part1 && part2 && part3,
            fmt("iterate <= closed form: %s (worst excess %.3g, first at |ln r| = 1e%d); (xi/m)^m <= e^-xi: %s; "
                "eta|ln r| increasing to %.3g and decay_F %.3g -> %.3g: %s",
                part1 ? "yes" : "no", literal, bad_k, part2 ? "yes" : "no", prev_eta_L, first_decay, last_decay,
                part3 ? "yes" : "no")};
}

std::pair<double, double> spread_of(const PatchState& s) {
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 9; ++i) {
        const double r = 1e-3 * std::pow(100.0, i / 8.0);
        double worst = 0.0;
        for (int k = 0; k < 16; ++k) worst = std::max(worst, decomposition_residual(s, r, 2 * pi * k / 16).residual_over_r);
        lo = std::min(lo, worst);
        hi = std::max(hi, worst);
    }
    return {hi / lo, hi};
}

Outcome decomposition() {
    const auto [spread, C] = spread_of(make_corner_patch(pi / 8, 0.99, 1024));
    if (shared_run) {
        const auto [s2, c2] = spread_of(shared_run->final_state);
        info(fmt("evolved patch at t = %.2f: spread %.3f, max residual/r %.4f", shared_run->final_state.t, s2, c2));
    }
    return {spread < 10, fmt("spread of max residual/r over r in [1e-3, 1e-1]: %.3f (< 10), max %.4f", spread, C)};
}

} // namespace

int main() {
    criterion(1, "Q-identity", 10, identity);
    criterion(2, "monotonicity", 10, monotonicity);
    criterion(3, "decay", 60, decay);
    criterion(4, "oracle equivalence", 30, oracles);
    criterion(5, "contour-dynamics benchmarks", 300, benchmarks);
    criterion(6, "corner physics", 1800, corner_physics);
    resolution_study();
    criterion(7, "perturbation bound", 1, perturbation_bound);
    criterion(8, "flow map", 5, flow_map_check);
    criterion(9, "bounds lab", 5, bounds);
    criterion(10, "velocity decomposition", 120, decomposition);
    std::printf("%d of 10 criteria failed\n", failures);
    return std::min(failures, 1);
}
