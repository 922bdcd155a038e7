#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cusplab/bounds_lab.hpp"
#include "cusplab/errors.hpp"

using namespace cusplab;
using std::numbers::e;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

// Largest excess of the recursion over a bound, scaled by the largest recursion value.
template <class Bound>
double worst_excess(const BoundParams& p, int m, LogRadius r, double t_max, Bound bound) {
    const GridFunction g = iterate_F(p, m, make_grid(t_max, 257, {r}));
    double worst = -1e300;
    for (std::size_t j = 0; j < g.t.size(); ++j) worst = std::max(worst, g.values[0][j] - bound(p, m, g.t[j], r));
    return worst;
}

} // namespace

TEST_CASE("log radius representation") {
    CHECK(LogRadius::from_r(std::exp(-3.0)).L == doctest::Approx(3.0));
    CHECK(LogRadius{10}.r() == doctest::Approx(std::exp(-10.0)));
    CHECK(LogRadius{1e6}.r() == 0.0);
    CHECK(LogRadius{10}.r_string() == "4.5399929762484854e-5");
    CHECK(LogRadius{1}.r_string() == "3.6787944117144233e-1");
    CHECK(LogRadius{1e6}.r_string().find("e-434295") != std::string::npos);
    CHECK_THROWS_AS(LogRadius::from_r(1.5), DomainError);
    CHECK_THROWS_AS(LogRadius::from_r(0.0), DomainError);
}

TEST_CASE("kappa moduli") {
    CHECK(Kappa::zero()(0.3) == 0.0);
    CHECK(Kappa::zero().is_zero());
    const Kappa pw = Kappa::power(2.0, 0.5);
    CHECK(pw(0.25) == doctest::Approx(1.0));
    CHECK(pw.at_log(1e4) == doctest::Approx(2.0 * std::exp(-0.5e4)).epsilon(1e-12));
    CHECK(Kappa::power(0.0, 1.0).is_zero());
    CHECK_THROWS_AS(Kappa::power(1.0, 0.0), DomainError);

    const Kappa tab = Kappa::table({{1e-4, 1e-3}, {1e-2, 1e-1}, {1.0, 0.5}});
    // Linear in ln r between nodes: halfway in ln r gives the mean.
    CHECK(tab(1e-3) == doctest::Approx(0.5 * (1e-3 + 1e-1)));
    CHECK(tab(1e-6) == doctest::Approx(1e-5)); // scaled linearly below the first node
    CHECK(tab(1.0) == doctest::Approx(0.5));
    CHECK(tab(0.0) == 0.0);
    CHECK_THROWS_AS(Kappa::table({}), DomainError);
    CHECK_THROWS_AS(Kappa::table({{0.1, 0.2}, {0.01, 0.3}}), DomainError);
    CHECK_THROWS_AS(Kappa::table({{0.01, 0.2}, {0.1, 0.1}}), DomainError);

    std::istringstream is("# r kappa\n1e-4, 1e-3\n\n1e-2 0.1  # inline\n1 0.5\n");
    const Kappa read = Kappa::read_table(is);
    CHECK(read(1e-3) == doctest::Approx(tab(1e-3)));
    CHECK(read.describe() == "table(3 nodes)");
    std::istringstream bad("0.1\n");
    CHECK_THROWS_AS(Kappa::read_table(bad), DomainError);
}

TEST_CASE("parameter validation") {
    BoundParams p;
    CHECK_NOTHROW(validate(p));
    p.C = 0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    p.c0 = -1;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    p.Cstar = 0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    CHECK_THROWS_AS(make_grid(1.0, 256, {LogRadius{10}}), ConfigError);
    CHECK_THROWS_AS(make_grid(1.0, 255, {LogRadius{10}}), ConfigError);
    CHECK_THROWS_AS(make_grid(0.0, 257, {LogRadius{10}}), ConfigError);
}

TEST_CASE("first bound") {
    const BoundParams p;
    CHECK(F0(p, 0.0, LogRadius{10}) == 0.0);
    CHECK(F0(p, 0.1, LogRadius{10}) == doctest::Approx(0.1 + 0.005 * 10 + 0.1 * 10));
    // Decreasing in r means increasing in L.
    double prev = 0.0;
    for (double L : {1.0, 2.0, 10.0, 100.0}) {
        const double v = F0(p, 0.05, LogRadius{L});
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("one iteration is the seed") {
    const BoundParams p;
    const GridFunction g = iterate_F(p, 1, make_grid(0.2, 257, {LogRadius{10}, LogRadius{100}}));
    for (std::size_t i = 0; i < g.L.size(); ++i)
        for (std::size_t j = 0; j < g.t.size(); ++j) CHECK(g.values[i][j] == F0(p, g.t[j], g.L[i]));
    CHECK_THROWS_AS(iterate_F(p, 0, make_grid(0.2, 257, {LogRadius{10}})), DomainError);
}

TEST_CASE("iterates equal the Taylor partial sums") {
    BoundParams p;
    p.C = 1.3;
    for (double L : {10.0, 1e3}) {
        const LogRadius r{L};
        const double t_max = 3.0 / (p.C * L);
        for (int m : {2, 5, 12, 32}) {
            CAPTURE(L);
            CAPTURE(m);
            const GridFunction g = iterate_F(p, m, make_grid(t_max, 513, {r}));
            double scale = 0.0, err = 0.0;
            for (std::size_t j = 0; j < g.t.size(); ++j) {
                scale = std::max(scale, g.values[0][j]);
                err = std::max(err, std::abs(g.values[0][j] - taylor_partial_sum(p, m, g.t[j], r)));
            }
            CHECK(err / scale < 1e-8);
        }
    }
}

TEST_CASE("Taylor partial sum by direct summation") {
    const BoundParams p;
    const LogRadius r{20};
    const double t = 0.07, x = p.C * t * r.L;
    const int m = 6;
    double a = 0, b = 0;
    for (int k = 1; k <= m; ++k) a += std::pow(x, k) / factorial(k);
    for (int k = 1; k <= m; ++k) b += std::pow(x, k + 1) / factorial(k + 1);
    const double direct = a / r.L + b / (p.C * r.L) + std::pow(x, m) / factorial(m);
    CHECK(taylor_partial_sum(p, m, t, r) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("closed forms") {
    const BoundParams p;
    const LogRadius r{50};
    CHECK(closed_form(p, 3, 0.0, r) == doctest::Approx(2.0 / 50));
    const double x = 0.1 * 50;
    CHECK(closed_form(p, 4, 0.1, r) == doctest::Approx(2.0 / 50 * std::exp(x) + std::pow(x / 4, 4) / p.c0));
    CHECK(closed_form_stirling_corrected(p, 4, 0.1, r) ==
          doctest::Approx(2.0 / 50 * std::exp(x) + std::pow(e * x / 4, 4) / p.c0));
    // Stirling lower bound behind the corrected form.
    for (int m = 1; m <= 60; ++m) CHECK(factorial(m) >= p.c0 * std::pow(m / e, m));
}

TEST_CASE("corrected closed form dominates the recursion") {
    const BoundParams p;
    for (int k = 1; k <= 6; ++k) {
        const LogRadius r{std::pow(10.0, k)};
        const double t_max = choose_parameters(p, r).eta;
        for (int m = 1; m <= 32; ++m) {
            CAPTURE(k);
            CAPTURE(m);
            CHECK(worst_excess(p, m, r, t_max, closed_form_stirling_corrected) <= 0.0);
        }
    }
}

TEST_CASE("literal closed form is exceeded at moderate L") {
    // (x/m)^m undershoots x^m/m! by e^m up to polynomial factors; documented deviation.
    const BoundParams p;
    const LogRadius r{1e3};
    const double t_max = choose_parameters(p, r).eta;
    double worst = -1e300;
    for (int m = 1; m <= 32; ++m) worst = std::max(worst, worst_excess(p, m, r, t_max, closed_form));
    CHECK(worst > 1.0);
    // At L = 10 the literal form still holds.
    const LogRadius small{10};
    for (int m = 1; m <= 32; ++m)
        CHECK(worst_excess(p, m, small, choose_parameters(p, small).eta, closed_form) <= 0.0);
}

TEST_CASE("choice of parameters") {
    const BoundParams p;
    const ParameterChoice c = choose_parameters(p, LogRadius{100});
    CHECK(c.xi == doctest::Approx(0.5 * std::log(100.0)));
    CHECK(c.xi == doctest::Approx(2.3026).epsilon(1e-4));
    CHECK(c.m == 7);
    CHECK(c.m >= e * c.xi);
    CHECK(c.m <= 4 * c.xi);
    CHECK(c.eta == doctest::Approx(c.xi / 100));

    // The κ branch is active when κ(L^{-1/2}) is larger than L^{-1}.
    BoundParams q;
    q.kappa = Kappa::power(1.0, 0.5);
    const ParameterChoice d = choose_parameters(q, LogRadius{1e4});
    CHECK(d.xi == doctest::Approx(0.5 * std::log(1.0 / std::pow(1e-2, 0.5))));

    // ξ = ½ ln 1.4 ≈ 0.17: m = 1 exceeds 4ξ.
    CHECK_THROWS_AS(choose_parameters(p, LogRadius{1.4}), DomainError);
    CHECK(choose_parameters(p, LogRadius{2}).m == 1);
    CHECK_THROWS_AS(choose_parameters(p, LogRadius{0.5}), DomainError);

    double prev_xi = 0.0, prev_eta = 1.0;
    for (int k = 1; k <= 6; ++k) {
        const ParameterChoice s = choose_parameters(p, LogRadius{std::pow(10.0, k)});
        CHECK(s.xi > prev_xi);
        CHECK(s.eta < prev_eta);
        prev_xi = s.xi;
        prev_eta = s.eta;
    }
}

TEST_CASE("est_m inequality over a range of xi") {
    for (double xi = 1.0; xi <= 50.0; xi += 0.25) {
        const int m = static_cast<int>(std::ceil(e * xi));
        if (m > 4 * xi) continue;
        CHECK(m * std::log(xi / m) <= -xi);
    }
}

TEST_CASE("decay of the F bound and the G bound") {
    const BoundParams p;
    double prevF = 1e300, prevG = 1e300;
    for (int k = 1; k <= 6; ++k) {
        const LogRadius r{std::pow(10.0, k)};
        const double f = decay_F(p, r);
        const double g = final_G_bound(p, r, 0.5).total();
        CHECK(f == doctest::Approx(2 * std::log(r.L) / std::sqrt(r.L)));
        CHECK(f < prevF);
        CHECK(g < prevG);
        prevF = f;
        prevG = g;
    }
    CHECK(prevF < 0.03);
    const GBound b = final_G_bound(p, LogRadius{100}, 0.5);
    CHECK(b.model_term == doctest::Approx(std::pow(std::log(100.0), -1.5)));
    CHECK(b.model_term == doctest::Approx(0.101).epsilon(0.01));
    CHECK_THROWS_AS(final_G_bound(p, LogRadius{100}, 0.0), DomainError);
}

TEST_CASE("descendants of the modulus") {
    BoundParams p;
    const LogRadius r{100};
    const ParameterChoice c = choose_parameters(p, r);
    const DescendantBound z = kappa_descendants(p, c.m, c.eta, r);
    CHECK(z.value == 0.0);
    CHECK(z.holds);

    p.kappa = Kappa::power(1.0, 1.0);
    const DescendantBound d = kappa_descendants(p, c.m, c.eta, r);
    CHECK(std::isfinite(d.bound));
    CHECK(d.value > 0.0);
    CHECK(d.holds);
    // Partial sums grow with m.
    double prev = 0.0;
    for (int m = 1; m <= 8; ++m) {
        const double v = kappa_descendants(p, m, c.eta, r).value;
        CHECK(v >= prev);
        prev = v;
    }
    // At m = 1 the recursion is the seed κ(r).
    CHECK(kappa_descendants(p, 1, c.eta, r).value == doctest::Approx(std::exp(-100.0)));
    CHECK_THROWS_AS(kappa_descendants(p, 3, c.eta, r, 1.5), DomainError);
    CHECK_THROWS_AS(kappa_descendants(p, 0, c.eta, r), DomainError);
}

TEST_CASE("bounds csv") {
    const BoundParams p;
    std::ostringstream os;
    const std::vector<LogRadius> radii{{10}, {1e6}};
    write_bounds_csv(os, p, radii, 0.5);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "r,xi,m,eta,bound_F,bound_G");
    std::getline(is, line);
    CHECK(line.rfind("4.5399929762484854e-5,", 0) == 0);
    std::getline(is, line);
    CHECK(line.find("e-434295,") != std::string::npos);
}
