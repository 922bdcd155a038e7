#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "cusplab/errors.hpp"
#include "cusplab/euler_patch.hpp"

using namespace cusplab;
using std::numbers::pi;

namespace {

CDConfig coarse(double dt) {
    CDConfig c;
    c.dt = dt;
    c.remesh = false;
    c.symmetrize = false;
    return c;
}

double max_radius_error(const PatchState& s) {
    double e = 0.0;
    for (const auto& p : s.contours[0].nodes) e = std::max(e, std::abs(norm(p) - 1.0));
    return e;
}

} // namespace

TEST_CASE("configuration checks") {
    CDConfig c;
    CHECK_NOTHROW(validate(c));
    c.dt = 0.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.n_nodes = 4;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.quad_order = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.cfl_limit = -1;
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("corner patch construction") {
    const double B0 = pi / 8;
    const PatchState s = make_corner_patch(B0, 0.99, 1024);
    REQUIRE(s.contours.size() == 2);
    CHECK(s.symmetry == Symmetry::half_turn_pair);
    CHECK(s.contours[0].nodes.size() <= 512);
    CHECK(s.contours[0].nodes.size() > 400);
    CHECK(s.contours[0].nodes[0] == Vec2{});
    CHECK(symmetry_error(s) == 0.0);
    // Inside the sector radius every side node sits on a ray at angle ±B0.
    const double rho = corner_sector_radius(B0, 0.99);
    for (const auto& p : s.contours[0].nodes) {
        const double r = norm(p);
        if (r > 0 && r < 0.999 * rho) CHECK(std::abs(std::atan2(p.y, p.x)) == doctest::Approx(B0).epsilon(1e-12));
        CHECK(r <= 0.99 + 1e-12);
    }
    // Each wedge is a kite (origin, tangent points, cap centre) plus the cap's outer sector.
    const double R = rho * std::tan(B0);
    const double exact = 2 * (rho * R + 0.5 * R * R * (pi + 2 * B0));
    CHECK(total_area(s) == doctest::Approx(exact).epsilon(1e-3));
    CHECK(total_area(s) < exact);
    CHECK_NOTHROW(check_simple(s));

    CHECK_THROWS_AS(make_corner_patch(B0, 0.99, 256), DomainError);
    CHECK_THROWS_AS(make_corner_patch(0.0, 0.99, 1024), DomainError);
    CHECK_THROWS_AS(make_corner_patch(pi / 3, 0.99, 1024), DomainError);
    CHECK_THROWS_AS(make_corner_patch(B0, 1.5, 1024), DomainError);
}

TEST_CASE("polygon constructors") {
    CHECK(total_area(make_disc(1.0, 4096)) == doctest::Approx(pi).epsilon(1e-5));
    CHECK(total_area(make_ellipse(2.0, 1.0, 4096)) == doctest::Approx(2 * pi).epsilon(1e-5));
    CHECK_THROWS_AS(make_disc(-1.0, 10), DomainError);
    CHECK_THROWS_AS(make_ellipse(1.0, 1.0, 2), DomainError);
}

TEST_CASE("Rankine disc rotates rigidly with little radial drift") {
    PatchState s = make_disc(1.0, 256);
    const CDConfig cfg = coarse(0.05);
    const int steps = 63; // t ≈ π, a quarter of the turnover time 4π
    for (int i = 0; i < steps; ++i) advance(s, cfg);
    CHECK(max_radius_error(s) < 1e-4);
    const Vec2 p = s.contours[0].nodes[0];
    CHECK(std::atan2(p.y, p.x) == doctest::Approx(0.5 * s.t).epsilon(1e-4));
    CHECK(total_area(s) == doctest::Approx(total_area(make_disc(1.0, 256))).epsilon(1e-8));
}

TEST_CASE("Kirchhoff ellipse rotation rate") {
    PatchState s = make_ellipse(2.0, 1.0, 256);
    const CDConfig cfg = coarse(0.05);
    for (int i = 0; i < 40; ++i) advance(s, cfg);
    const double rate = principal_axis_angle(s.contours[0].nodes) / s.t;
    CHECK(rate == doctest::Approx(2.0 / 9.0).epsilon(0.01));
}

TEST_CASE("serial and parallel steps agree bitwise") {
    PatchState a = make_corner_patch(pi / 8, 0.99, 600);
    PatchState b = a;
    CDConfig cfg;
    cfg.dt = 2e-3;
    cfg.parallel = false;
    advance(a, cfg);
    cfg.parallel = true;
    advance(b, cfg);
    REQUIRE(a.contours[0].nodes.size() == b.contours[0].nodes.size());
    bool same = true;
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < a.contours[c].nodes.size(); ++i)
            same = same && a.contours[c].nodes[i] == b.contours[c].nodes[i];
    CHECK(same);
}

TEST_CASE("corner patch invariants over a few steps") {
    PatchState s = make_corner_patch(pi / 8, 0.99, 600);
    const double area0 = total_area(s);
    CDConfig cfg;
    cfg.dt = 2e-3;
    for (int i = 0; i < 10; ++i) {
        advance(s, cfg);
        CHECK(s.contours[0].nodes[0] == Vec2{});
        CHECK(s.contours[1].nodes[0] == Vec2{});
        CHECK(symmetry_error(s) < 1e-10);
    }
    CHECK(std::abs(total_area(s) - area0) / area0 < 1e-3);
    CHECK_NOTHROW(check_simple(s));
}

TEST_CASE("without pinning the corner node stays put by symmetry") {
    PatchState s = make_corner_patch(pi / 8, 0.99, 600);
    CDConfig cfg;
    cfg.dt = 2e-3;
    cfg.pin_origin = false;
    for (int i = 0; i < 3; ++i) {
        advance(s, cfg);
        CHECK(norm(s.contours[0].nodes[0]) < 1e-8 * (i + 1));
    }
}

TEST_CASE("CFL guard") {
    PatchState s = make_ellipse(2.0, 1.0, 64);
    CDConfig cfg = coarse(50.0);
    CHECK_THROWS_AS(advance(s, cfg), InvariantViolation);
}

TEST_CASE("remesh inserts on long segments and keeps the corner") {
    PatchState s = make_corner_patch(pi / 8, 0.99, 600);
    const std::size_t n0 = s.contours[0].nodes.size();
    CHECK_FALSE(remesh(s));
    // Tighten the spacing target and the mesh must refine.
    for (auto& c : s.contours) c.mesh.h_max *= 0.5;
    CHECK(remesh(s));
    CHECK(s.contours[0].nodes.size() > n0);
    CHECK(s.contours[0].nodes[0] == Vec2{});
    CHECK(symmetry_error(s) == 0.0);
    CHECK_NOTHROW(check_simple(s));

    // Coarsen: deletions happen but the corner survives.
    PatchState t = make_corner_patch(pi / 8, 0.99, 600);
    for (auto& c : t.contours) {
        c.mesh.h_max *= 4.0;
        c.mesh.grading *= 4.0;
    }
    CHECK(remesh(t));
    CHECK(t.contours[0].nodes.size() < n0);
    CHECK(t.contours[0].nodes[0] == Vec2{});

    PatchState d = make_disc(1.0, 32);
    CHECK_FALSE(remesh(d)); // mesh disabled
}

TEST_CASE("check_simple finds crossings") {
    PatchState s;
    Contour bow;
    bow.nodes = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    s.contours = {bow};
    CHECK_THROWS_AS(check_simple(s), GeometryError);

    PatchState two = make_disc(1.0, 32);
    PatchState other = make_disc(1.0, 32);
    for (auto& p : other.contours[0].nodes) p = p + Vec2{0.5, 0.0};
    two.contours.push_back(other.contours[0]);
    CHECK_THROWS_AS(check_simple(two), GeometryError);
}

TEST_CASE("anchor and symmetrize preconditions") {
    PatchState d = make_disc(1.0, 16);
    CHECK_THROWS_AS(corner_anchor(d), DomainError);
    CHECK_THROWS_AS(symmetrize(d), DomainError);

    PatchState s = make_corner_patch(pi / 8, 0.99, 600);
    s.contours[1].nodes[5] = s.contours[1].nodes[5] + Vec2{1e-6, 0.0};
    CHECK(symmetry_error(s) > 0.0);
    symmetrize(s);
    CHECK(symmetry_error(s) == 0.0);
}

TEST_CASE("snapshot csv") {
    const PatchState s = make_disc(1.0, 4);
    std::ostringstream os;
    write_snapshot_csv(os, s, 0, true);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,node_index,x,y");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 4);
    CHECK_THROWS_AS(write_snapshot_csv(os, s, 1, false), DomainError);
}
