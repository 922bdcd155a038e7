#include "cusplab/bounds_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cusplab/csv.hpp"
#include "cusplab/errors.hpp"

namespace cusplab {

namespace {
using std::numbers::e;

void require_L(LogRadius r) {
    if (!(r.L > 0.0) || !std::isfinite(r.L)) throw DomainError("log-radius must be positive and finite");
}

// Cumulative ∫₀^{t_j} y dt on a uniform grid: Simpson pairs, with a three-point
// quadratic rule for the odd nodes.
std::vector<double> cumulative_simpson(std::span<const double> y, double h) {
    const std::size_t n = y.size();
    std::vector<double> out(n, 0.0);
    if (n < 3) {
        if (n == 2) out[1] = 0.5 * h * (y[0] + y[1]);
        return out;
    }
    for (std::size_t j = 1; j < n; ++j) {
        if (j % 2 == 0) {
            out[j] = out[j - 2] + h / 3.0 * (y[j - 2] + 4 * y[j - 1] + y[j]);
        } else if (j + 1 < n) {
            out[j] = out[j - 1] + h / 12.0 * (5 * y[j - 1] + 8 * y[j] - y[j + 1]);
        } else {
            out[j] = out[j - 1] + h / 12.0 * (-y[j - 2] + 8 * y[j - 1] + 5 * y[j]);
        }
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------

LogRadius LogRadius::from_r(double r) {
    if (!(r > 0.0 && r < 1.0)) throw DomainError("radius must lie in (0, 1)");
    return {-std::log(r)};
}

double LogRadius::r() const { return std::exp(-L); }

std::string LogRadius::r_string() const {
    std::ostringstream os;
    if (const double r = std::exp(-L); std::isnormal(r)) {
        // exact digits while r is representable
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.16e", r);
        const std::string s = buf;
        const auto epos = s.find('e');
        os << s.substr(0, epos) << 'e' << std::stoi(s.substr(epos + 1));
        return os.str();
    }
    const double lg = -L / std::numbers::ln10;
    double ex = std::floor(lg);
    double mant = std::pow(10.0, lg - ex);
    if (mant >= 10.0) {
        mant /= 10.0;
        ex += 1.0;
    }
    os << csv::fmt(mant) << 'e' << static_cast<long long>(ex);
    return os.str();
}

// ---------------------------------------------------------------------------

Kappa Kappa::zero() { return {}; }

Kappa Kappa::power(double a, double p) {
    if (!(a >= 0.0) || !(p > 0.0)) throw DomainError("kappa power law needs a >= 0 and p > 0");
    Kappa k;
    k.kind_ = a == 0.0 ? Kind::zero : Kind::power;
    k.a_ = a;
    k.p_ = p;
    return k;
}

Kappa Kappa::table(std::vector<std::pair<double, double>> nodes) {
    if (nodes.empty()) throw DomainError("kappa table is empty");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto [r, v] = nodes[i];
        if (!(r > 0.0 && r <= 1.0) || !(v >= 0.0)) throw DomainError("kappa table entries need r in (0,1], kappa >= 0");
        if (i > 0 && (r <= nodes[i - 1].first || v < nodes[i - 1].second))
            throw DomainError("kappa table must be ascending in r and non-decreasing");
    }
    Kappa k;
    k.kind_ = Kind::table;
    k.nodes_ = std::move(nodes);
    return k;
}

Kappa Kappa::read_table(std::istream& is) {
    std::vector<std::pair<double, double>> nodes;
    std::string line;
    while (std::getline(is, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double r, v;
        if (!(ls >> r)) continue;
        if (!(ls >> v)) throw DomainError("kappa table line needs two columns: " + line);
        nodes.emplace_back(r, v);
    }
    return table(std::move(nodes));
}

double Kappa::operator()(double r) const {
    if (r <= 0.0) return 0.0;
    switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::power: return a_ * std::pow(r, p_);
    case Kind::table: break;
    }
    const auto& n = nodes_;
    if (r <= n.front().first) return n.front().second * r / n.front().first;
    if (r >= n.back().first) return n.back().second;
    const auto it = std::upper_bound(n.begin(), n.end(), r,
                                     [](double x, const std::pair<double, double>& q) { return x < q.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double u = std::log(r / lo.first) / std::log(hi.first / lo.first);
    return lo.second + u * (hi.second - lo.second);
}

double Kappa::at_log(double L) const {
    if (kind_ == Kind::power) return a_ * std::exp(-p_ * L);
    return (*this)(std::exp(-L));
}

std::string Kappa::describe() const {
    switch (kind_) {
    case Kind::zero: return "zero";
    case Kind::power: return "power(" + csv::fmt(a_) + "," + csv::fmt(p_) + ")";
    case Kind::table: return "table(" + std::to_string(nodes_.size()) + " nodes)";
    }
    return {};
}

void validate(const BoundParams& p) {
    if (!(p.C > 0.0)) throw ConfigError("bounds: C must be positive");
    if (!(p.c0 > 0.0)) throw ConfigError("bounds: c0 must be positive");
    if (!(p.Cstar > 0.0)) throw ConfigError("bounds: Cstar must be positive");
}

// ---------------------------------------------------------------------------

double F0(const BoundParams& p, double t, LogRadius r) {
    require_L(r);
    return p.C * t + p.C * t * t * r.L / 2 + p.C * t * r.L;
}

GridFunction make_grid(double t_max, int n_t, std::vector<LogRadius> radii) {
    if (!(t_max > 0.0)) throw ConfigError("grid: t_max must be positive");
    if (n_t < 257 || n_t % 2 == 0) throw ConfigError("grid: need an odd number of at least 257 time points");
    for (auto r : radii) require_L(r);
    GridFunction g;
    g.t.resize(static_cast<std::size_t>(n_t));
    for (int j = 0; j < n_t; ++j) g.t[static_cast<std::size_t>(j)] = t_max * j / (n_t - 1);
    g.L = std::move(radii);
    g.values.assign(g.L.size(), std::vector<double>(g.t.size(), 0.0));
    return g;
}

GridFunction iterate_F(const BoundParams& p, int m, GridFunction grid) {
    validate(p);
    if (m < 1) throw DomainError("iterate_F: m must be at least 1");
    if (grid.t.size() < 3) throw DomainError("iterate_F: time grid too coarse");
    const double h = grid.t[1] - grid.t[0];
    grid.values.resize(grid.L.size());
    for (std::size_t i = 0; i < grid.L.size(); ++i) {
        const double L = grid.L[i].L;
        auto& f = grid.values[i];
        f.resize(grid.t.size());
        for (std::size_t j = 0; j < f.size(); ++j) f[j] = F0(p, grid.t[j], grid.L[i]);
        for (int k = 1; k < m; ++k) {
            const auto cum = cumulative_simpson(f, h);
            for (std::size_t j = 0; j < f.size(); ++j) {
                const double t = grid.t[j];
                f[j] = p.C * t + p.C * t * t * L / 2 + p.C * L * cum[j];
            }
        }
    }
    return grid;
}

double taylor_partial_sum(const BoundParams& p, int m, double t, LogRadius r) {
    require_L(r);
    if (m < 1) throw DomainError("taylor_partial_sum: m must be at least 1");
    const double x = p.C * t * r.L;
    double term = 1.0, first = 0.0, shifted = 0.0, last = 0.0;
    for (int k = 1; k <= m + 1; ++k) {
        term *= x / k; // x^k / k!
        if (k <= m) first += term;
        if (k >= 2) shifted += term;
        if (k == m) last = term;
    }
    return first / r.L + shifted / (p.C * r.L) + last;
}

double closed_form(const BoundParams& p, int m, double t, LogRadius r) {
    require_L(r);
    if (m < 1) throw DomainError("closed_form: m must be at least 1");
    const double x = p.C * t * r.L;
    return 2.0 / r.L * std::exp(x) + std::pow(x / m, m) / p.c0;
}

double closed_form_stirling_corrected(const BoundParams& p, int m, double t, LogRadius r) {
    require_L(r);
    if (m < 1) throw DomainError("closed_form: m must be at least 1");
    const double x = p.C * t * r.L;
    return 2.0 / r.L * std::exp(x) + std::pow(e * x / m, m) / p.c0;
}

// ---------------------------------------------------------------------------

DescendantBound kappa_descendants(const BoundParams& p, int m, double t, LogRadius r, double delta) {
    validate(p);
    require_L(r);
    if (m < 1) throw DomainError("kappa_descendants: m must be at least 1");
    if (t < 0.0) throw DomainError("kappa_descendants: negative time");
    if (delta <= 0.0) delta = 1.0 / r.L;
    if (!(delta < 1.0) || !(-std::log(delta) < r.L))
        throw DomainError("kappa_descendants: need r < delta < 1");

    DescendantBound out;
    out.bound = (p.kappa(std::sqrt(delta)) + std::abs(std::log(delta)) / r.L) * std::exp(p.C * t * r.L);

    // log-radius nodes: 0, then geometric from 1e-6·L up to L
    constexpr int nL = 401;
    std::vector<double> Ls(nL + 1, 0.0);
    for (int i = 0; i < nL; ++i) Ls[static_cast<std::size_t>(i + 1)] = r.L * std::pow(1e-6, double(nL - 1 - i) / (nL - 1));
    std::vector<double> kap(Ls.size());
    for (std::size_t i = 0; i < Ls.size(); ++i) kap[i] = p.kappa.at_log(Ls[i]);

    if (t == 0.0 || m == 1 || p.kappa.is_zero()) {
        out.value = kap.back();
        out.holds = out.value <= out.bound * (1 + 1e-12);
        return out;
    }

    constexpr int nt = 257;
    const double h = t / (nt - 1);
    const double shrink = std::exp(-p.Cstar * std::numbers::pi / 4 * t);

    // f[i][j]: value at log-radius Ls[i], time t_j
    std::vector<std::vector<double>> f(Ls.size(), std::vector<double>(nt));
    for (std::size_t i = 0; i < Ls.size(); ++i) std::fill(f[i].begin(), f[i].end(), kap[i]);
    std::vector<std::vector<double>> g(Ls.size(), std::vector<double>(nt));

    auto interp = [&](int j, double L) {
        const auto it = std::upper_bound(Ls.begin(), Ls.end(), L);
        if (it == Ls.begin()) return f[0][static_cast<std::size_t>(j)];
        if (it == Ls.end()) return f.back()[static_cast<std::size_t>(j)];
        const std::size_t k = static_cast<std::size_t>(it - Ls.begin());
        const double u = (L - Ls[k - 1]) / (Ls[k] - Ls[k - 1]);
        return (1 - u) * f[k - 1][static_cast<std::size_t>(j)] + u * f[k][static_cast<std::size_t>(j)];
    };

    for (int k = 1; k < m; ++k) {
        for (int j = 0; j < nt; ++j) {
            const std::size_t sj = static_cast<std::size_t>(j);
            double cum = 0.0;
            for (std::size_t i = 0; i < Ls.size(); ++i) {
                if (i > 0) cum += 0.5 * (Ls[i] - Ls[i - 1]) * (f[i][sj] + f[i - 1][sj]);
                const double lo = Ls[i] * shrink;
                double sup = std::max(f[i][sj], interp(j, lo));
                for (std::size_t q = i; q-- > 0 && Ls[q] >= lo;) sup = std::max(sup, f[q][sj]);
                g[i][sj] = cum + Ls[i] * sup;
            }
        }
        for (std::size_t i = 0; i < Ls.size(); ++i) {
            const auto cum = cumulative_simpson(g[i], h);
            for (int j = 0; j < nt; ++j) f[i][static_cast<std::size_t>(j)] = kap[i] + p.C * cum[static_cast<std::size_t>(j)];
        }
    }
    out.value = f.back().back();
    out.holds = out.value <= out.bound * (1 + 1e-12);
    return out;
}

ParameterChoice choose_parameters(const BoundParams& p, LogRadius r) {
    validate(p);
    require_L(r);
    const double k = p.kappa(1.0 / std::sqrt(r.L));
    const double from_kappa = k > 0.0 ? std::log(1.0 / k) : std::numeric_limits<double>::infinity();
    ParameterChoice c;
    c.xi = 0.5 * std::min(std::log(r.L), from_kappa);
    if (!(c.xi > 0.0)) throw DomainError("choose_parameters: xi is not positive at L=" + csv::fmt(r.L));
    c.m = static_cast<int>(std::ceil(e * c.xi));
    if (c.m > 4 * c.xi)
        throw DomainError("choose_parameters: no integer in [e*xi, 4*xi] at L=" + csv::fmt(r.L));
    c.eta = c.xi / (p.C * r.L);
    return c;
}

double decay_F(const BoundParams& p, LogRadius r) {
    require_L(r);
    return 2.0 * std::log(r.L) / std::sqrt(r.L) + std::sqrt(p.kappa(1.0 / std::sqrt(r.L)));
}

GBound final_G_bound(const BoundParams& p, LogRadius r, double delta) {
    require_L(r);
    if (!(delta > 0.0)) throw DomainError("final_G_bound: delta must be positive");
    if (!(r.L > 1.0)) throw DomainError("final_G_bound: need |ln r| > 1");
    GBound b;
    b.model_term = std::max(std::pow(std::log(r.L), -(1.0 + delta)), std::sqrt(p.kappa(1.0 / std::sqrt(r.L))));
    b.F_term = decay_F(p, r);
    return b;
}

void write_bounds_csv(std::ostream& os, const BoundParams& p, std::span<const LogRadius> radii,
                      double delta) {
    csv::header(os, {"r", "xi", "m", "eta", "bound_F", "bound_G"});
    for (const auto r : radii) {
        const ParameterChoice c = choose_parameters(p, r);
        os << r.r_string() << ',' << csv::fmt(c.xi) << ',' << c.m << ',' << csv::fmt(c.eta) << ','
           << csv::fmt(decay_F(p, r)) << ',' << csv::fmt(final_G_bound(p, r, delta).total()) << '\n';
    }
}

} // namespace cusplab
