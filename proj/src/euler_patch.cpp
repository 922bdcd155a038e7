#include "cusplab/euler_patch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "cusplab/csv.hpp"
#include "cusplab/errors.hpp"

namespace cusplab {

namespace {
using std::numbers::pi;

bool is_corner_pair(const PatchState& s) {
    return s.symmetry == Symmetry::half_turn_pair && s.contours.size() == 2 &&
           s.contours[0].corner_at_origin && s.contours[1].corner_at_origin;
}
} // namespace

void validate(const CDConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
    if (cfg.n_nodes < 8) throw ConfigError("n_nodes must be at least 8");
    if (cfg.quad_order < 1 || cfg.quad_order > 128) throw ConfigError("quad_order must be in [1, 128]");
    if (!(cfg.near_factor > 0.0)) throw ConfigError("near_factor must be positive");
    if (!(cfg.cfl_limit > 0.0)) throw ConfigError("cfl_limit must be positive");
}

std::vector<std::vector<Vec2>> node_velocities(const PatchState& state, const KernelOptions& opt,
                                               bool parallel) {
    auto eval = [&](std::span<const Vec2> targets, std::span<Vec2> out) {
        if (parallel)
            velocities_parallel(state.contours, targets, out, opt);
        else
            velocities_serial(state.contours, targets, out, opt);
    };
    std::vector<std::vector<Vec2>> v(state.contours.size());
    if (state.symmetry == Symmetry::half_turn_pair && state.contours.size() == 2 &&
        state.contours[0].nodes.size() == state.contours[1].nodes.size()) {
        v[0].resize(state.contours[0].nodes.size());
        eval(state.contours[0].nodes, v[0]);
        v[1].resize(v[0].size());
        for (std::size_t i = 0; i < v[0].size(); ++i) v[1][i] = -v[0][i];
        return v;
    }
    std::vector<Vec2> all;
    for (const auto& c : state.contours) all.insert(all.end(), c.nodes.begin(), c.nodes.end());
    std::vector<Vec2> out(all.size());
    eval(all, out);
    std::size_t off = 0;
    for (std::size_t c = 0; c < state.contours.size(); ++c) {
        const std::size_t n = state.contours[c].nodes.size();
        v[c].assign(out.begin() + static_cast<long>(off), out.begin() + static_cast<long>(off + n));
        off += n;
    }
    return v;
}

StepReport advance(PatchState& state, const CDConfig& cfg) {
    validate(cfg);
    const KernelOptions opt = cfg.kernel();
    const bool pin = cfg.pin_origin && is_corner_pair(state);
    const double dt = cfg.dt;

    auto velocities = [&](const PatchState& s) {
        auto v = node_velocities(s, opt, cfg.parallel);
        if (pin)
            for (auto& vc : v) vc[0] = {};
        return v;
    };

    const PatchState base = state;
    PatchState stage = state;
    auto set_stage = [&](const std::vector<std::vector<Vec2>>& k, double c) {
        for (std::size_t ci = 0; ci < base.contours.size(); ++ci)
            for (std::size_t i = 0; i < base.contours[ci].nodes.size(); ++i)
                stage.contours[ci].nodes[i] = base.contours[ci].nodes[i] + (c * dt) * k[ci][i];
    };

    const auto k1 = velocities(base);
    StepReport rep;
    for (std::size_t ci = 0; ci < base.contours.size(); ++ci) {
        const auto& x = base.contours[ci].nodes;
        const std::size_t n = x.size();
        for (std::size_t i = 0; i < n; ++i) {
            rep.max_speed = std::max(rep.max_speed, norm(k1[ci][i]));
            const std::size_t j = (i + 1) % n;
            const double dx = norm(x[j] - x[i]);
            if (dx > 0) rep.cfl = std::max(rep.cfl, dt * norm(k1[ci][j] - k1[ci][i]) / dx);
        }
    }
    // Checked before stepping so a bad dt never reaches remesh.
    if (rep.cfl > cfg.cfl_limit)
        throw InvariantViolation("cfl", "dt*max|grad u| = " + std::to_string(rep.cfl) +
                                            " exceeds " + std::to_string(cfg.cfl_limit) +
                                            " at t=" + std::to_string(base.t));
    set_stage(k1, 0.5);
    const auto k2 = velocities(stage);
    set_stage(k2, 0.5);
    const auto k3 = velocities(stage);
    set_stage(k3, 1.0);
    const auto k4 = velocities(stage);

    for (std::size_t ci = 0; ci < base.contours.size(); ++ci) {
        auto& nodes = state.contours[ci].nodes;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            nodes[i] = base.contours[ci].nodes[i] +
                       (dt / 6.0) * (k1[ci][i] + 2.0 * k2[ci][i] + 2.0 * k3[ci][i] + k4[ci][i]);
    }
    state.t = base.t + dt;
    if (pin) corner_anchor(state);
    if (cfg.remesh) rep.remeshed = remesh(state);
    if (cfg.symmetrize && state.symmetry == Symmetry::half_turn_pair) symmetrize(state);
    if (rep.remeshed) check_simple(state);
    return rep;
}

PatchState step(const PatchState& state, const CDConfig& cfg) {
    PatchState out = state;
    advance(out, cfg);
    return out;
}

// ---------------------------------------------------------------------------

double corner_sector_radius(double B0, double r_outer) {
    return r_outer / (1.0 / std::cos(B0) + std::tan(B0));
}

namespace {

std::vector<Vec2> build_wedge(double B0, double rho, double h_max, const CornerMesh& m) {
    std::vector<double> rs{m.r_min};
    for (;;) {
        const double r = rs.back();
        const double h = std::min(h_max, std::max(m.r_min, m.grading * r)); // same rule as remesh
        if (r + h >= rho - 0.3 * h) break;
        rs.push_back(r + h);
    }
    rs.push_back(rho);
    const double R = rho * std::tan(B0);
    const Vec2 c{rho / std::cos(B0), 0.0};
    const double span = pi + 2 * B0;
    const double h_arc = std::min(h_max, m.curvature * R);
    const int n_arc = std::max(2, static_cast<int>(std::ceil(R * span / h_arc)));

    std::vector<Vec2> nodes{{0.0, 0.0}};
    const Vec2 lower{std::cos(B0), -std::sin(B0)}, upper{std::cos(B0), std::sin(B0)};
    for (double r : rs) nodes.push_back(r * lower);
    const double phi0 = -(pi / 2 + B0);
    for (int j = 1; j < n_arc; ++j) {
        const double phi = phi0 + span * j / n_arc;
        nodes.push_back(c + R * Vec2{std::cos(phi), std::sin(phi)});
    }
    for (auto it = rs.rbegin(); it != rs.rend(); ++it) nodes.push_back(*it * upper);
    return nodes;
}

} // namespace

PatchState make_corner_patch(double B0, double r_outer, std::size_t n_nodes, const CornerMesh& m) {
    if (!(B0 > 0.0 && B0 < pi / 4)) throw DomainError("corner patch: B0 must lie in (0, pi/4)");
    if (!(r_outer > 0.0 && r_outer < 1.0)) throw DomainError("corner patch: r_outer must lie in (0, 1)");
    if (!(m.r_min > 0.0) || !(m.grading > 0.0)) throw DomainError("corner patch: bad mesh grading");
    const double rho = corner_sector_radius(B0, r_outer);
    if (m.r_min >= 0.5 * rho) throw DomainError("corner patch: r_min too large for r_outer");
    const std::size_t per = n_nodes / 2;
    if (per < 16) throw DomainError("corner patch: n_nodes too small");

    // bisection on h_max (count decreases with h_max)
    double lo = 1e-7, hi = r_outer;
    if (build_wedge(B0, rho, hi, m).size() > per)
        throw DomainError("corner patch: n_nodes too small for r_min and grading");
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (build_wedge(B0, rho, mid, m).size() > per)
            lo = mid;
        else
            hi = mid;
        if (hi / lo < 1 + 1e-12) break;
    }
    const double h_max = hi;

    Contour c0;
    c0.nodes = build_wedge(B0, rho, h_max, m);
    c0.corner_at_origin = true;
    c0.mesh = {true, m.r_min, h_max, m.grading, m.curvature};
    Contour c1 = c0;
    for (auto& p : c1.nodes) p = Vec2{} - p;
    PatchState s;
    s.contours = {c0, c1};
    s.symmetry = Symmetry::half_turn_pair;
    return s;
}

PatchState make_disc(double R, std::size_t n) {
    if (!(R > 0.0) || n < 3) throw DomainError("disc: need R > 0 and n >= 3");
    Contour c;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = 2 * pi * static_cast<double>(k) / static_cast<double>(n);
        c.nodes.push_back({R * std::cos(a), R * std::sin(a)});
    }
    PatchState s;
    s.contours = {c};
    return s;
}

PatchState make_ellipse(double a, double b, std::size_t n) {
    if (!(a > 0.0 && b > 0.0) || n < 3) throw DomainError("ellipse: need a, b > 0 and n >= 3");
    Contour c;
    for (std::size_t k = 0; k < n; ++k) {
        const double phi = 2 * pi * static_cast<double>(k) / static_cast<double>(n);
        c.nodes.push_back({a * std::cos(phi), b * std::sin(phi)});
    }
    PatchState s;
    s.contours = {c};
    return s;
}

void corner_anchor(PatchState& state) {
    if (!is_corner_pair(state))
        throw DomainError("corner_anchor: requires a two-fold symmetric corner patch");
    state.contours[0].nodes[0] = {0.0, 0.0};
    state.contours[1].nodes[0] = {0.0, 0.0};
}

void symmetrize(PatchState& state) {
    if (state.symmetry != Symmetry::half_turn_pair || state.contours.size() != 2)
        throw DomainError("symmetrize: state is not a half-turn pair");
    auto& c0 = state.contours[0];
    auto& c1 = state.contours[1];
    if (c1.nodes.size() == c0.nodes.size()) {
        // average the pair, then mirror, so neither contour is privileged
        for (std::size_t i = 0; i < c0.nodes.size(); ++i)
            c0.nodes[i] = 0.5 * (c0.nodes[i] - c1.nodes[i]);
    }
    c1 = c0;
    for (auto& p : c1.nodes) p = Vec2{} - p;
}

// ---------------------------------------------------------------------------

namespace {

double node_curvature(Vec2 a, Vec2 b, Vec2 c) {
    const Vec2 u = b - a, v = c - b, w = c - a;
    const double den = norm(u) * norm(v) * norm(w);
    return den > 0 ? 2.0 * std::abs(cross(u, v)) / den : 0.0;
}

double target_spacing(const Contour& c, Vec2 x, double kappa) {
    const MeshSpec& m = c.mesh;
    double h = m.h_max;
    if (c.corner_at_origin) h = std::min(h, std::max(m.h_min, m.grading * norm(x)));
    if (kappa > 0) h = std::min(h, m.curvature / kappa);
    return std::max(h, m.h_min);
}

bool remesh_contour(Contour& c) {
    if (!c.mesh.enabled) return false;
    auto& P = c.nodes;
    const std::size_t n = P.size();
    if (n < 4) return false;
    std::vector<double> len(n), kappa(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) len[i] = norm(P[(i + 1) % n] - P[i]);
    for (std::size_t i = 0; i < n; ++i) {
        if (c.corner_at_origin && i == 0) continue;
        kappa[i] = node_curvature(P[(i + n - 1) % n], P[i], P[(i + 1) % n]);
    }
    // unit-speed tangents; at a corner node the outgoing and incoming tangents differ
    std::vector<Vec2> t_out(n), t_in(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = (i + n - 1) % n, in = (i + 1) % n;
        const double l0 = len[ip], l1 = len[i];
        const Vec2 d0 = P[i] - P[ip], d1 = P[in] - P[i];
        if (c.corner_at_origin && i == 0) {
            const double l2 = len[1];
            const Vec2 d2 = P[2] - P[1];
            t_out[i] = (1.0 + l1 / (l1 + l2)) * (1.0 / l1) * d1 - (l1 / (l1 + l2)) * (1.0 / l2) * d2;
            const double lm = len[n - 2];
            const Vec2 dm = P[n - 1] - P[n - 2];
            t_in[i] = (1.0 + l0 / (l0 + lm)) * (1.0 / l0) * d0 - (l0 / (l0 + lm)) * (1.0 / lm) * dm;
        } else {
            t_out[i] = t_in[i] = (l1 / (l0 + l1)) * (1.0 / l0) * d0 + (l0 / (l0 + l1)) * (1.0 / l1) * d1;
        }
    }

    bool changed = false;
    std::vector<Vec2> Q;
    std::vector<double> kq;
    Q.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        Q.push_back(P[i]);
        kq.push_back(kappa[i]);
        const double L = len[i];
        const double tgt = target_spacing(c, 0.5 * (P[i] + P[j]), std::max(kappa[i], kappa[j]));
        if (L > 1.6 * tgt) {
            const int k = static_cast<int>(std::ceil(L / tgt)) - 1;
            for (int s = 1; s <= k; ++s) {
                const double u = static_cast<double>(s) / (k + 1);
                const double u2 = u * u, u3 = u2 * u;
                const Vec2 p = (2 * u3 - 3 * u2 + 1) * P[i] + ((u3 - 2 * u2 + u) * L) * t_out[i] +
                               (-2 * u3 + 3 * u2) * P[j] + ((u3 - u2) * L) * t_in[j];
                Q.push_back(p);
                kq.push_back(std::max(kappa[i], kappa[j]));
            }
            changed = true;
        }
    }

    std::vector<Vec2> R;
    R.reserve(Q.size());
    const std::size_t m = Q.size();
    std::vector<bool> keep(m, true);
    for (std::size_t i = 1; i + 1 < m + 1 && m - std::count(keep.begin(), keep.end(), false) > 8; ++i) {
        if (i >= m) break;
        if (!keep[i - 1]) continue; // no two neighbours removed in one pass
        const std::size_t ip = i - 1, in = (i + 1) % m;
        if (c.corner_at_origin && in == 0) continue;
        const double a = norm(Q[i] - Q[ip]), b = norm(Q[in] - Q[i]);
        const double tgt = target_spacing(c, Q[i], kq[i]);
        if (a + b < 0.9 * tgt && std::min(a, b) < 0.4 * tgt) {
            keep[i] = false;
            changed = true;
        }
    }
    for (std::size_t i = 0; i < m; ++i)
        if (keep[i]) R.push_back(Q[i]);
    P = std::move(R);
    return changed;
}

} // namespace

bool remesh(PatchState& state) {
    if (state.symmetry == Symmetry::half_turn_pair && state.contours.size() == 2) {
        const bool changed = remesh_contour(state.contours[0]);
        if (changed) {
            state.contours[1] = state.contours[0];
            for (auto& p : state.contours[1].nodes) p = Vec2{} - p;
        }
        return changed;
    }
    bool changed = false;
    for (auto& c : state.contours) changed = remesh_contour(c) || changed;
    return changed;
}

double total_area(const PatchState& state) {
    double a = 0.0;
    for (const auto& c : state.contours) a += signed_area(c.nodes);
    return a;
}

double symmetry_error(const PatchState& state) {
    if (state.contours.size() != 2 || state.contours[0].nodes.size() != state.contours[1].nodes.size())
        return std::numeric_limits<double>::infinity();
    double e = 0.0;
    const auto& a = state.contours[0].nodes;
    const auto& b = state.contours[1].nodes;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, norm(a[i] + b[i]));
    return e;
}

namespace {
struct Box {
    double x0, x1, y0, y1;
};
Box seg_box(Vec2 a, Vec2 b) {
    return {std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y), std::max(a.y, b.y)};
}
bool overlap(const Box& p, const Box& q) {
    return p.x0 <= q.x1 && q.x0 <= p.x1 && p.y0 <= q.y1 && q.y0 <= p.y1;
}
} // namespace

void check_simple(const PatchState& state) {
    const auto& C = state.contours;
    std::vector<std::vector<Box>> boxes(C.size());
    for (std::size_t c = 0; c < C.size(); ++c) {
        const auto& P = C[c].nodes;
        const std::size_t n = P.size();
        if (n < 3) throw GeometryError("contour " + std::to_string(c) + " has fewer than 3 nodes");
        for (std::size_t i = 0; i < n; ++i) boxes[c].push_back(seg_box(P[i], P[(i + 1) % n]));
    }
    for (std::size_t c = 0; c < C.size(); ++c) {
        const auto& P = C[c].nodes;
        const std::size_t n = P.size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;
                if (!overlap(boxes[c][i], boxes[c][j])) continue;
                if (segments_intersect(P[i], P[(i + 1) % n], P[j], P[(j + 1) % n]))
                    throw GeometryError("contour " + std::to_string(c) + " self-intersects at segments " +
                                        std::to_string(i) + "," + std::to_string(j) +
                                        " (t=" + std::to_string(state.t) + ")");
            }
    }
    for (std::size_t c = 0; c < C.size(); ++c)
        for (std::size_t d = c + 1; d < C.size(); ++d) {
            const auto& P = C[c].nodes;
            const auto& Q = C[d].nodes;
            const std::size_t n = P.size(), m = Q.size();
            const bool shared = C[c].corner_at_origin && C[d].corner_at_origin;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    if (shared && (i == 0 || i == n - 1) && (j == 0 || j == m - 1)) continue;
                    if (!overlap(boxes[c][i], boxes[d][j])) continue;
                    if (segments_intersect(P[i], P[(i + 1) % n], Q[j], Q[(j + 1) % m]))
                        throw GeometryError("contours " + std::to_string(c) + " and " +
                                            std::to_string(d) + " intersect (t=" +
                                            std::to_string(state.t) + ")");
                }
        }
}

void write_snapshot_csv(std::ostream& os, const PatchState& state, std::size_t contour, bool header) {
    if (contour >= state.contours.size()) throw DomainError("snapshot: no such contour");
    if (header) csv::header(os, {"t", "node_index", "x", "y"});
    const auto& P = state.contours[contour].nodes;
    for (std::size_t i = 0; i < P.size(); ++i)
        csv::row(os, {state.t, static_cast<double>(i), P[i].x, P[i].y});
}

} // namespace cusplab
