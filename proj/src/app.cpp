#include "cusplab/app.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <list>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cusplab/bounds_lab.hpp"
#include "cusplab/csv.hpp"
#include "cusplab/diagnostics.hpp"
#include "cusplab/effective_ode.hpp"
#include "cusplab/errors.hpp"
#include "cusplab/euler_patch.hpp"

namespace cusplab::app {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kCommands{"effective", "euler", "compare", "decomp", "bounds", "collapse"};

// ---------------------------------------------------------------------------
// JSON

ordered_json block_json(const EffectiveBlock& b) {
    return {{"startup_eps", b.startup_eps}, {"rel_tol", b.rel_tol},   {"abs_tol", b.abs_tol},
            {"tau_max", b.tau_max},         {"chebyshev_nodes", b.chebyshev_nodes}, {"b_floor", b.b_floor}};
}
ordered_json block_json(const EulerBlock& b) {
    return {{"n_nodes", b.n_nodes},     {"dt", b.dt},
            {"t_end", b.t_end},         {"quad_order", b.quad_order},
            {"near_factor", b.near_factor}, {"symmetrize", b.symmetrize},
            {"remesh", b.remesh},       {"snapshot_every", b.snapshot_every},
            {"r_outer", b.r_outer},     {"r_min", b.r_min},
            {"grading", b.grading},     {"curvature", b.curvature},
            {"cfl_limit", b.cfl_limit}};
}
ordered_json block_json(const DiagnosticsBlock& b) {
    return {{"radii", b.radii}, {"sample_every", b.sample_every}, {"clock_ratio", b.clock_ratio}, {"cstar", b.cstar}};
}
ordered_json block_json(const DecompBlock& b) {
    return {{"t", b.t}, {"r_min", b.r_min}, {"r_max", b.r_max}, {"n_r", b.n_r}, {"n_theta", b.n_theta}};
}
ordered_json block_json(const BoundsBlock& b) {
    return {{"C", b.C},         {"c0", b.c0},           {"cstar", b.cstar},
            {"kappa", b.kappa}, {"log_radii", b.log_radii}, {"delta", b.delta}};
}

ordered_json config_json(const RunConfig& c) {
    return {{"command", c.command},
            {"output_dir", c.output_dir.string()},
            {"b0", c.b0},
            {"effective", block_json(c.effective)},
            {"euler", block_json(c.euler)},
            {"diagnostics", block_json(c.diagnostics)},
            {"decomp", block_json(c.decomp)},
            {"bounds", block_json(c.bounds)}};
}

// Strict reader: unknown keys and type mismatches are configuration errors.
class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }
    template <class T>
    Reader& get(const char* key, T& out) {
        seen_.push_back(key);
        if (!j_.contains(key)) return *this;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where_ + "." + key + ": " + e.what());
        }
        return *this;
    }
    const json* child(const char* key) {
        seen_.push_back(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }
    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (std::find(seen_.begin(), seen_.end(), k) == seen_.end())
                throw ConfigError(where_ + ": unknown key '" + k + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::vector<std::string> seen_;
};

void read_block(const json& j, EffectiveBlock& b) {
    Reader r(j, "effective");
    r.get("startup_eps", b.startup_eps).get("rel_tol", b.rel_tol).get("abs_tol", b.abs_tol);
    r.get("tau_max", b.tau_max).get("chebyshev_nodes", b.chebyshev_nodes).get("b_floor", b.b_floor);
    r.finish();
}
void read_block(const json& j, EulerBlock& b) {
    Reader r(j, "euler");
    r.get("n_nodes", b.n_nodes).get("dt", b.dt).get("t_end", b.t_end).get("quad_order", b.quad_order);
    r.get("near_factor", b.near_factor).get("symmetrize", b.symmetrize).get("remesh", b.remesh);
    r.get("snapshot_every", b.snapshot_every).get("r_outer", b.r_outer).get("r_min", b.r_min);
    r.get("grading", b.grading).get("curvature", b.curvature).get("cfl_limit", b.cfl_limit);
    r.finish();
}
void read_block(const json& j, DiagnosticsBlock& b) {
    Reader r(j, "diagnostics");
    r.get("radii", b.radii).get("sample_every", b.sample_every).get("clock_ratio", b.clock_ratio);
    r.get("cstar", b.cstar);
    r.finish();
}
void read_block(const json& j, DecompBlock& b) {
    Reader r(j, "decomp");
    r.get("t", b.t).get("r_min", b.r_min).get("r_max", b.r_max).get("n_r", b.n_r).get("n_theta", b.n_theta);
    r.finish();
}
void read_block(const json& j, BoundsBlock& b) {
    Reader r(j, "bounds");
    r.get("C", b.C).get("c0", b.c0).get("cstar", b.cstar).get("kappa", b.kappa);
    r.get("log_radii", b.log_radii).get("delta", b.delta);
    r.finish();
}

// ---------------------------------------------------------------------------

ModelParams model_params(const RunConfig& c) {
    ModelParams p;
    p.B0 = c.b0;
    p.startup_eps = c.effective.startup_eps;
    p.rel_tol = c.effective.rel_tol;
    p.abs_tol = c.effective.abs_tol;
    p.tau_max = c.effective.tau_max;
    p.chebyshev_nodes = c.effective.chebyshev_nodes;
    p.b_floor = c.effective.b_floor;
    return p;
}

CDConfig cd_config(const EulerBlock& e) {
    CDConfig c;
    c.n_nodes = e.n_nodes;
    c.dt = e.dt;
    c.quad_order = e.quad_order;
    c.near_factor = e.near_factor;
    c.symmetrize = e.symmetrize;
    c.remesh = e.remesh;
    c.cfl_limit = e.cfl_limit;
    return c;
}

Kappa make_kappa(const std::string& spec) {
    if (spec == "zero") return Kappa::zero();
    if (spec.rfind("power:", 0) == 0) {
        const std::string args = spec.substr(6);
        const auto comma = args.find(',');
        if (comma == std::string::npos) throw ConfigError("kappa power spec is power:a,p");
        try {
            return Kappa::power(std::stod(args.substr(0, comma)), std::stod(args.substr(comma + 1)));
        } catch (const std::logic_error&) {
            throw ConfigError("kappa power spec is power:a,p, got " + spec);
        }
    }
    if (spec.rfind("table:", 0) == 0) {
        std::ifstream is(spec.substr(6));
        if (!is) throw ConfigError("cannot open kappa table " + spec.substr(6));
        try {
            return Kappa::read_table(is);
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
    }
    throw ConfigError("kappa must be zero, power:a,p or table:<path>; got " + spec);
}

BoundParams bound_params(const BoundsBlock& b) {
    BoundParams p;
    p.C = b.C;
    p.c0 = b.c0;
    p.Cstar = b.cstar;
    p.kappa = make_kappa(b.kappa);
    return p;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p);
    if (!os) throw Error("cannot write " + p.string());
    return os;
}

void write_json(const std::filesystem::path& p, const ordered_json& j) {
    auto os = open_out(p);
    os << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Euler driver shared by euler / compare / collapse / decomp

long step_count(double t_end, double dt) { return std::lround(t_end / dt); }

PatchState initial_patch(const RunConfig& c) {
    const auto& e = c.euler;
    return make_corner_patch(c.b0, e.r_outer, e.n_nodes, CornerMesh{e.r_min, e.grading, e.curvature});
}

// Calls on_step after the initial state and after every step. Area and symmetry
// are audited as the run goes.
void evolve(const RunConfig& c, double t_end, const std::function<void(const PatchState&, long)>& on_step,
            std::ostream& log) {
    PatchState s = initial_patch(c);
    const CDConfig cfg = cd_config(c.euler);
    const double area0 = total_area(s);
    const long steps = step_count(t_end, c.euler.dt);
    on_step(s, 0);
    for (long i = 1; i <= steps; ++i) {
        advance(s, cfg);
        const double drift = std::abs(total_area(s) - area0) / area0;
        if (drift >= 1e-3)
            throw InvariantViolation("area conservation", "relative drift " + csv::fmt(drift) + " at t=" + csv::fmt(s.t));
        if (cfg.symmetrize && symmetry_error(s) >= 1e-10)
            throw InvariantViolation("two-fold symmetry", "error " + csv::fmt(symmetry_error(s)));
        on_step(s, i);
        if (i % 100 == 0) log << "t=" << s.t << " nodes=" << s.node_count() << '\n';
    }
}

long sample_stride(const RunConfig& c) {
    return std::max(1L, std::lround(c.diagnostics.sample_every / c.euler.dt));
}

// ---------------------------------------------------------------------------
// commands

ordered_json cmd_effective(const RunConfig& c, std::vector<std::string>& outputs) {
    const Trajectory traj = integrate(model_params(c));
    {
        auto os = open_out(c.output_dir / "trajectory.csv");
        write_trajectory_csv(os, traj);
        outputs.push_back("trajectory.csv");
    }
    const TrajectoryAudit a = audit(traj);
    ordered_json rep{{"tau_end", traj.tau_end()},
                     {"samples", traj.size()},
                     {"numerically_cusped", traj.numerically_cusped()},
                     {"identity_max", a.identity_max},
                     {"B_nonincreasing", a.B_nonincreasing},
                     {"I_nondecreasing", a.I_nondecreasing},
                     {"q_rate_min", a.q_rate_min},
                     {"q_rate_max", a.q_rate_max},
                     {"q_rate_in_range", a.q_rate_in_range},
                     {"I_crossing", a.I_crossing},
                     {"startup_eps", traj.startup_end},
                     {"startup_contraction", traj.startup_contraction}};
    if (traj.tau_end() >= 1e4) {
        const DecayFit fit = estimate_delta(traj, 1e3, std::min(1e6, traj.tau_end()));
        rep["delta"] = fit.delta;
        rep["slope_dB"] = fit.slope_dB;
    }
    if (!traj.numerically_cusped()) {
        try {
            const LimitA lim = limit_A(traj);
            rep["A_inf"] = lim.A_inf;
            rep["A_tail_variation"] = lim.tail_variation;
        } catch (const ConvergenceError&) {
            rep["A_inf"] = nullptr;
        }
    }
    write_json(c.output_dir / "report.json", rep);
    outputs.push_back("report.json");
    if (a.identity_max >= 1e-7)
        throw InvariantViolation("Q-identity", "max |pi A' + sin 4B| = " + csv::fmt(a.identity_max));
    if (!a.B_nonincreasing) throw InvariantViolation("B non-increasing", "trajectory.csv");
    if (!a.I_nondecreasing) throw InvariantViolation("I non-decreasing", "trajectory.csv");
    if (!a.q_rate_in_range) throw InvariantViolation("Q/tau range", "trajectory.csv");
    return rep;
}

ordered_json cmd_euler(const RunConfig& c, std::vector<std::string>& outputs, std::ostream& log) {
    const auto& e = c.euler;
    auto s0 = open_out(c.output_dir / "snapshots_c0.csv");
    auto s1 = open_out(c.output_dir / "snapshots_c1.csv");
    const long steps = step_count(e.t_end, e.dt);
    PatchState last;
    double area0 = 0.0;
    evolve(
        c, e.t_end,
        [&](const PatchState& s, long i) {
            if (i == 0) area0 = total_area(s);
            if ((e.snapshot_every > 0 && i % e.snapshot_every == 0) || i == steps) {
                write_snapshot_csv(s0, s, 0, i == 0);
                write_snapshot_csv(s1, s, 1, i == 0);
            }
            if (i == steps) last = s;
        },
        log);
    outputs.insert(outputs.end(), {"snapshots_c0.csv", "snapshots_c1.csv"});
    write_json(c.output_dir / "run_manifest.json",
               {{"b0", c.b0},
                {"n_nodes", e.n_nodes},
                {"dt", e.dt},
                {"t_end", e.t_end},
                {"quad_order", e.quad_order},
                {"symmetrize", e.symmetrize},
                {"snapshot_every", e.snapshot_every}});
    outputs.push_back("run_manifest.json");
    return {{"t_final", last.t},
            {"nodes_final", last.node_count()},
            {"area_drift", std::abs(total_area(last) - area0) / area0},
            {"symmetry_error", symmetry_error(last)}};
}

ordered_json cmd_compare(const RunConfig& c, std::vector<std::string>& outputs, std::ostream& log) {
    const Trajectory traj = integrate(model_params(c));
    const ModelClock clock{c.diagnostics.clock_ratio};
    const long stride = sample_stride(c);
    std::vector<DiagnosticsRow> rows;
    std::vector<double> F_initial(c.diagnostics.radii.size(), 0.0);
    double C_fit = 0.0;
    long bound_misses = 0;
    evolve(
        c, c.euler.t_end,
        [&](const PatchState& s, long i) {
            if (i % stride != 0) return;
            for (std::size_t k = 0; k < c.diagnostics.radii.size(); ++k) {
                const double r = c.diagnostics.radii[k];
                const DiagnosticsRow row = probe(s, traj, r, clock);
                rows.push_back(row);
                if (i == 0) F_initial[k] = row.F;
                if (s.t > 0) C_fit = std::max(C_fit, (row.F - F_initial[k]) / (s.t * std::abs(std::log(r))));
                if (row.G > row.F + model_G(traj, s.t, r, clock) + 1e-12) ++bound_misses;
            }
        },
        log);
    auto os = open_out(c.output_dir / "diagnostics.csv");
    write_diagnostics_csv(os, rows);
    outputs.push_back("diagnostics.csv");
    return {{"C_fit", C_fit}, {"G_decomposition_misses", bound_misses}, {"clock_ratio", clock.ratio}};
}

ordered_json cmd_collapse(const RunConfig& c, std::vector<std::string>& outputs, std::ostream& log) {
    const Trajectory traj = integrate(model_params(c));
    const ModelClock clock{c.diagnostics.clock_ratio};
    const long stride = sample_stride(c);
    auto os = open_out(c.output_dir / "collapse.csv");
    csv::header(os, {"t", "r", "tau", "half_angle", "bisector", "B_model", "A_model"});
    evolve(
        c, c.euler.t_end,
        [&](const PatchState& s, long i) {
            if (i % stride != 0) return;
            for (double r : c.diagnostics.radii) {
                const CornerAngle a = corner_angle(s, r);
                const double tau = s.t * std::abs(std::log(r));
                const EffectiveState m = traj.at(clock.ratio * tau);
                csv::row(os, {s.t, r, tau, a.half_angle, a.bisector, m.B, m.A});
            }
        },
        log);
    outputs.push_back("collapse.csv");
    return {{"clock_ratio", clock.ratio}};
}

ordered_json cmd_decomp(const RunConfig& c, std::vector<std::string>& outputs, std::ostream& log) {
    PatchState state;
    evolve(
        c, c.decomp.t, [&](const PatchState& s, long i) {
            if (i == step_count(c.decomp.t, c.euler.dt)) state = s;
        },
        log);
    const auto& d = c.decomp;
    std::vector<DecompositionResidual> rows;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < d.n_r; ++i) {
        const double r = d.n_r == 1 ? d.r_min : d.r_min * std::pow(d.r_max / d.r_min, double(i) / (d.n_r - 1));
        double worst = 0.0;
        for (int k = 0; k < d.n_theta; ++k) {
            rows.push_back(decomposition_residual(state, r, 2 * std::numbers::pi * k / d.n_theta));
            worst = std::max(worst, rows.back().residual_over_r);
        }
        lo = std::min(lo, worst);
        hi = std::max(hi, worst);
    }
    auto os = open_out(c.output_dir / "decomposition.csv");
    write_decomposition_csv(os, rows);
    outputs.push_back("decomposition.csv");
    return {{"t", state.t}, {"C_emp", hi}, {"spread", hi / lo}};
}

ordered_json cmd_bounds(const RunConfig& c, std::vector<std::string>& outputs) {
    const BoundParams p = bound_params(c.bounds);
    std::vector<LogRadius> radii;
    for (double L : c.bounds.log_radii) radii.push_back({L});
    {
        auto os = open_out(c.output_dir / "bounds.csv");
        write_bounds_csv(os, p, radii, c.bounds.delta);
        outputs.push_back("bounds.csv");
    }
    ordered_json rows = ordered_json::array();
    for (const auto r : radii) {
        const ParameterChoice pc = choose_parameters(p, r);
        rows.push_back({{"log_radius", r.L}, {"xi", pc.xi}, {"m", pc.m}, {"eta", pc.eta}, {"eta_log_r", pc.eta * r.L}});
    }
    return {{"kappa", p.kappa.describe()}, {"rows", rows}};
}

void apply_thread_cap() {
    const char* env = std::getenv("CUSPLAB_THREADS");
    if (!env || !*env) return;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) throw ConfigError("CUSPLAB_THREADS must be a positive integer");
    omp_set_num_threads(static_cast<int>(n));
}

} // namespace

// ---------------------------------------------------------------------------

void validate(const RunConfig& c) {
    if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end())
        throw ConfigError("unknown command '" + c.command + "'");
    if (c.output_dir.empty()) throw ConfigError("output_dir is empty");
    try {
        validate(model_params(c));
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    const auto& e = c.euler;
    validate(cd_config(e));
    if (!(e.t_end >= 0.0)) throw ConfigError("euler.t_end must be non-negative");
    if (e.snapshot_every < 0) throw ConfigError("euler.snapshot_every must be non-negative");
    if (!(e.r_outer > 0.0 && e.r_outer < 1.0)) throw ConfigError("euler.r_outer must lie in (0, 1)");
    if (!(e.r_min > 0.0) || !(e.grading > 0.0) || !(e.curvature > 0.0))
        throw ConfigError("euler mesh parameters must be positive");
    if (c.command == "euler" || c.command == "compare" || c.command == "collapse" || c.command == "decomp") {
        try {
            initial_patch(c);
        } catch (const DomainError& err) {
            throw ConfigError(err.what());
        }
    }
    const auto& g = c.diagnostics;
    if (g.radii.empty()) throw ConfigError("diagnostics.radii is empty");
    for (double r : g.radii)
        if (!(r > 0.0 && r < 1.0)) throw ConfigError("diagnostics.radii must lie in (0, 1)");
    if (!(g.sample_every > 0.0)) throw ConfigError("diagnostics.sample_every must be positive");
    if (!(g.clock_ratio > 0.0)) throw ConfigError("diagnostics.clock_ratio must be positive");
    if (!(g.cstar > 0.0)) throw ConfigError("diagnostics.cstar must be positive");
    const auto& d = c.decomp;
    if (!(d.t >= 0.0)) throw ConfigError("decomp.t must be non-negative");
    if (!(d.r_min > 0.0 && d.r_min <= d.r_max && d.r_max < 1.0)) throw ConfigError("decomp radii must satisfy 0 < r_min <= r_max < 1");
    if (d.n_r < 1 || d.n_theta < 1) throw ConfigError("decomp.n_r and n_theta must be positive");
    const auto& b = c.bounds;
    validate(bound_params(b));
    for (double L : b.log_radii)
        if (!(L > 1.0) || !std::isfinite(L)) throw ConfigError("bounds.log_radii must exceed 1");
    if (!(b.delta > 0.0)) throw ConfigError("bounds.delta must be positive");
}

std::string to_json(const RunConfig& cfg) { return config_json(cfg).dump(2); }

RunConfig from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    Reader r(j, "config");
    std::string dir = c.output_dir.string();
    r.get("command", c.command).get("output_dir", dir).get("b0", c.b0);
    c.output_dir = dir;
    if (const json* b = r.child("effective")) read_block(*b, c.effective);
    if (const json* b = r.child("euler")) read_block(*b, c.euler);
    if (const json* b = r.child("diagnostics")) read_block(*b, c.diagnostics);
    if (const json* b = r.child("decomp")) read_block(*b, c.decomp);
    if (const json* b = r.child("bounds")) read_block(*b, c.bounds);
    r.finish();
    return c;
}

std::string config_hash(const RunConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_json(cfg).dump())));
    return buf;
}

double parse_log_radius(const std::string& token) {
    try {
        std::size_t used = 0;
        if (!token.empty() && (token[0] == 'e' || token[0] == 'E')) {
            const double x = std::stod(token.substr(1), &used);
            if (used + 1 != token.size() || !(x < 0.0)) throw std::invalid_argument(token);
            return -x;
        }
        const double r = std::stod(token, &used);
        if (used != token.size() || !(r > 0.0 && r < 1.0)) throw std::invalid_argument(token);
        return -std::log(r);
    } catch (const std::logic_error&) {
        throw ConfigError("cannot read radius '" + token + "' (use e-10 for r = e^-10, or a number in (0,1))");
    }
}

void run(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    apply_thread_cap();
    std::filesystem::create_directories(cfg.output_dir);
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::string> outputs;
    ordered_json report;
    if (cfg.command == "effective") report = cmd_effective(cfg, outputs);
    else if (cfg.command == "euler") report = cmd_euler(cfg, outputs, log);
    else if (cfg.command == "compare") report = cmd_compare(cfg, outputs, log);
    else if (cfg.command == "collapse") report = cmd_collapse(cfg, outputs, log);
    else if (cfg.command == "decomp") report = cmd_decomp(cfg, outputs, log);
    else report = cmd_bounds(cfg, outputs);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json(cfg.output_dir / "manifest.json", {{"version", kVersion},
                                                  {"command", cfg.command},
                                                  {"config", config_json(cfg)},
                                                  {"config_hash", config_hash(cfg)},
                                                  {"wall_time_s", wall},
                                                  {"outputs", outputs},
                                                  {"report", report}});
    log << report.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App cli{"Corner and cusp laboratory for 2D Euler vortex patches", "cusplab"};
    cli.require_subcommand(1);
    cli.fallthrough();
    std::string config_path, output_dir;
    cli.add_option("--config", config_path, "JSON config file; flags override its values");
    cli.add_option("-o,--output-dir", output_dir, "directory for artifacts");

    // Flag values are kept as strings and applied on top of the config after parsing.
    std::list<std::string> store;
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overlay;
    auto flag = [&](CLI::App* sc, const std::string& name, const std::string& help, auto apply) {
        const std::string& val = store.emplace_back();
        CLI::Option* opt = sc->add_option(name, store.back(), help)->type_name("VALUE");
        overlay.emplace_back(opt, [apply, &val](RunConfig& c) { apply(c, val); });
    };
    auto num = [](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::logic_error&) {
            throw ConfigError("not a number: '" + s + "'");
        }
    };
    auto integer = [num](const std::string& s) {
        const double v = num(s);
        if (v != std::floor(v)) throw ConfigError("not an integer: '" + s + "'");
        return static_cast<long>(v);
    };
    auto boolean = [](const std::string& s) {
        if (s == "true" || s == "1" || s == "on") return true;
        if (s == "false" || s == "0" || s == "off") return false;
        throw ConfigError("not a boolean: '" + s + "'");
    };
    auto list = [num](const std::string& s) {
        std::vector<double> v;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) v.push_back(num(tok));
        return v;
    };

    std::map<std::string, CLI::App*> sub;
    sub["effective"] = cli.add_subcommand("effective", "integrate the effective corner ODE");
    sub["euler"] = cli.add_subcommand("euler", "contour-dynamics run of the two-fold corner patch");
    sub["compare"] = cli.add_subcommand("compare", "Euler run with G, F, theta-bar probes against the model");
    sub["collapse"] = cli.add_subcommand("collapse", "measured half-angle against t|ln r| at several radii");
    sub["decomp"] = cli.add_subcommand("decomp", "residual of the leading-order velocity split");
    sub["bounds"] = cli.add_subcommand("bounds", "parameter table of the iterated F and G bounds");

    for (auto& [name, sc] : sub) {
        flag(sc, "--b0", "initial half-angle", [num](RunConfig& c, const std::string& v) { c.b0 = num(v); });
        if (name != "bounds") {
            flag(sc, "--tau-max", "model horizon", [num](RunConfig& c, const std::string& v) { c.effective.tau_max = num(v); });
            flag(sc, "--rel-tol", "model relative tolerance", [num](RunConfig& c, const std::string& v) { c.effective.rel_tol = num(v); });
            flag(sc, "--abs-tol", "model absolute tolerance", [num](RunConfig& c, const std::string& v) { c.effective.abs_tol = num(v); });
            flag(sc, "--startup-eps", "Picard startup interval", [num](RunConfig& c, const std::string& v) { c.effective.startup_eps = num(v); });
        }
        if (name == "euler" || name == "compare" || name == "collapse" || name == "decomp") {
            flag(sc, "--n-nodes", "nodes over both contours", [integer](RunConfig& c, const std::string& v) {
                const long n = integer(v);
                if (n < 0) throw ConfigError("n-nodes must be positive");
                c.euler.n_nodes = static_cast<std::size_t>(n);
            });
            flag(sc, "--dt", "time step", [num](RunConfig& c, const std::string& v) { c.euler.dt = num(v); });
            flag(sc, "--t-end", "final time", [num](RunConfig& c, const std::string& v) { c.euler.t_end = num(v); });
            flag(sc, "--quad-order", "far-field Gauss-Legendre order", [integer](RunConfig& c, const std::string& v) { c.euler.quad_order = static_cast<int>(integer(v)); });
            flag(sc, "--symmetrize", "true|false", [boolean](RunConfig& c, const std::string& v) { c.euler.symmetrize = boolean(v); });
            flag(sc, "--remesh", "true|false", [boolean](RunConfig& c, const std::string& v) { c.euler.remesh = boolean(v); });
            flag(sc, "--snapshot-every", "steps between snapshots", [integer](RunConfig& c, const std::string& v) { c.euler.snapshot_every = static_cast<int>(integer(v)); });
            flag(sc, "--r-outer", "outer extent of the patch", [num](RunConfig& c, const std::string& v) { c.euler.r_outer = num(v); });
            flag(sc, "--r-min", "smallest node spacing at the corner", [num](RunConfig& c, const std::string& v) { c.euler.r_min = num(v); });
        }
        if (name == "compare" || name == "collapse") {
            flag(sc, "--radii", "probe radii, comma separated", [list](RunConfig& c, const std::string& v) { c.diagnostics.radii = list(v); });
            flag(sc, "--sample-every", "time between probes", [num](RunConfig& c, const std::string& v) { c.diagnostics.sample_every = num(v); });
            flag(sc, "--clock-ratio", "model time per unit t|ln r|", [num](RunConfig& c, const std::string& v) { c.diagnostics.clock_ratio = num(v); });
        }
        if (name == "decomp") {
            flag(sc, "--t", "evolve to this time first", [num](RunConfig& c, const std::string& v) { c.decomp.t = num(v); });
            flag(sc, "--probe-r-min", "smallest probe radius", [num](RunConfig& c, const std::string& v) { c.decomp.r_min = num(v); });
            flag(sc, "--probe-r-max", "largest probe radius", [num](RunConfig& c, const std::string& v) { c.decomp.r_max = num(v); });
            flag(sc, "--n-r", "number of probe radii", [integer](RunConfig& c, const std::string& v) { c.decomp.n_r = static_cast<int>(integer(v)); });
            flag(sc, "--n-theta", "number of probe angles", [integer](RunConfig& c, const std::string& v) { c.decomp.n_theta = static_cast<int>(integer(v)); });
        }
        if (name == "bounds") {
            flag(sc, "--kappa", "zero | power:a,p | table:<path>", [](RunConfig& c, const std::string& v) { c.bounds.kappa = v; });
            flag(sc, "--r-list", "radii, e.g. e-10,e-100 or 1e-3", [](RunConfig& c, const std::string& v) {
                c.bounds.log_radii.clear();
                std::stringstream ss(v);
                std::string tok;
                while (std::getline(ss, tok, ',')) c.bounds.log_radii.push_back(parse_log_radius(tok));
            });
            flag(sc, "--C", "iteration constant", [num](RunConfig& c, const std::string& v) { c.bounds.C = num(v); });
            flag(sc, "--c0", "Stirling constant", [num](RunConfig& c, const std::string& v) { c.bounds.c0 = num(v); });
            flag(sc, "--cstar", "flow-map constant", [num](RunConfig& c, const std::string& v) { c.bounds.cstar = num(v); });
            flag(sc, "--delta", "decay exponent excess", [num](RunConfig& c, const std::string& v) { c.bounds.delta = num(v); });
        }
    }

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << cli.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw ConfigError("cannot open config " + config_path);
            std::stringstream ss;
            ss << is.rdbuf();
            cfg = from_json(ss.str());
        }
        for (auto& [name, sc] : sub)
            if (sc->parsed()) cfg.command = name;
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        for (auto& [opt, apply] : overlay)
            if (opt->count() > 0) apply(cfg);
        run(cfg, out);
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const InvariantViolation& e) {
        err << "invariant violated: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace cusplab::app
