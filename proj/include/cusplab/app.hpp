#pragma once

// Command orchestration behind the `cusplab` executable.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cusplab::app {

inline constexpr const char* kVersion = "0.1.0";

struct EffectiveBlock {
    double startup_eps = 1e-3;
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    double tau_max = 1e4;
    int chebyshev_nodes = 24;
    double b_floor = 1e-14;
};

struct EulerBlock {
    std::size_t n_nodes = 1024;
    double dt = 1e-3;
    double t_end = 0.5;
    int quad_order = 8;
    double near_factor = 3.0;
    bool symmetrize = true;
    bool remesh = true;
    int snapshot_every = 100; ///< steps; 0 disables snapshots
    double r_outer = 0.99;
    double r_min = 1e-5;
    double grading = 0.15;
    double curvature = 0.1;
    double cfl_limit = 0.5;
};

struct DiagnosticsBlock {
    std::vector<double> radii{1e-2, 1e-3};
    double sample_every = 0.01; ///< physical time between probes
    double clock_ratio = 0.5;
    double cstar = 1.0;
};

struct DecompBlock {
    double t = 0.0; ///< evolve the corner patch to this time first
    double r_min = 1e-3;
    double r_max = 1e-1;
    int n_r = 9;
    int n_theta = 16;
};

struct BoundsBlock {
    double C = 1.0;
    double c0 = 0.3989422804014327;
    double cstar = 1.0;
    std::string kappa = "zero"; ///< zero | power:a,p | table:<path>
    std::vector<double> log_radii{10.0, 100.0}; ///< |ln r|
    double delta = 0.5;
};

struct RunConfig {
    std::string command = "effective"; ///< effective|euler|compare|decomp|bounds|collapse
    std::filesystem::path output_dir = "out";
    double b0 = 0.39269908169872414;
    EffectiveBlock effective;
    EulerBlock euler;
    DiagnosticsBlock diagnostics;
    DecompBlock decomp;
    BoundsBlock bounds;
};

/// ConfigError on any invalid field.
void validate(const RunConfig& cfg);

std::string to_json(const RunConfig& cfg);
/// Unknown keys and type mismatches are ConfigError. Missing keys keep defaults.
RunConfig from_json(const std::string& text);

/// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Parses "e-10" as |ln r| = 10 and plain numbers as r. ConfigError otherwise.
double parse_log_radius(const std::string& token);

/// Runs one command, writing artifacts and manifest.json into cfg.output_dir.
/// Exceptions propagate.
void run(const RunConfig& cfg, std::ostream& log);

/// argv front end. Returns 0, 2 on ConfigError, 3 on InvariantViolation, 1 otherwise.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace cusplab::app
