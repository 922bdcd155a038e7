#pragma once

// Executable arithmetic of the iterated smallness bounds for F and G near the corner.
// Radii are carried as L = |ln r| because the interesting regime (r = e^{-10^6})
// is far below the smallest double.

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cusplab {

struct LogRadius {
    double L = 1.0; ///< |ln r|, r in (0, 1)

    static LogRadius from_r(double r);
    double r() const; ///< may underflow to 0
    /// "4.5399929762484854e-5" style rendering of r that never underflows.
    std::string r_string() const;
};

/// Monotone modulus κ(r) with κ(0+) = 0, as a table of (r, κ) pairs interpolated
/// linearly in ln r. Below the first node κ is scaled linearly in r, above the last it is held.
class Kappa {
public:
    static Kappa zero();
    /// κ(r) = a·r^p.
    static Kappa power(double a, double p);
    /// Throws DomainError unless r ascending in (0, 1], κ ≥ 0 and non-decreasing.
    static Kappa table(std::vector<std::pair<double, double>> nodes);
    /// Two whitespace- or comma-separated columns `r kappa`; '#' starts a comment.
    static Kappa read_table(std::istream& is);

    double operator()(double r) const;
    /// κ(e^{-L}); exact for power laws even when e^{-L} underflows.
    double at_log(double L) const;
    bool is_zero() const noexcept { return kind_ == Kind::zero; }
    std::string describe() const;

private:
    enum class Kind { zero, power, table };
    Kind kind_ = Kind::zero;
    double a_ = 0.0, p_ = 1.0;
    std::vector<std::pair<double, double>> nodes_;
};

struct BoundParams {
    double C = 1.0;
    double c0 = 0.3989422804014327; ///< Stirling constant in m! ≥ c0 (m/e)^m
    double Cstar = 1.0;
    Kappa kappa = Kappa::zero();
};
void validate(const BoundParams& p);

/// Ct + Ct²L/2 + CtL.
double F0(const BoundParams& p, double t, LogRadius r);

/// Values on a uniform t grid (from 0) times a list of log-radii; values[i][j] at (L_i, t_j).
struct GridFunction {
    std::vector<double> t;
    std::vector<LogRadius> L;
    std::vector<std::vector<double>> values;
};
/// n_t ≥ 257 odd points on [0, t_max]; ConfigError otherwise.
GridFunction make_grid(double t_max, int n_t, std::vector<LogRadius> radii);

/// F^{(m-1)}: F^{(0)} = F0, then F^{(k)} = Ct + Ct²L/2 + CL∫₀^t F^{(k-1)} dt' by
/// cumulative Simpson quadrature. DomainError for m < 1.
GridFunction iterate_F(const BoundParams& p, int m, GridFunction grid);
/// The explicit series F^{(m-1)} sums to.
double taylor_partial_sum(const BoundParams& p, int m, double t, LogRadius r);
/// (2/L)e^{CtL} + (1/c0)(CtL/m)^m.
double closed_form(const BoundParams& p, int m, double t, LogRadius r);
/// (2/L)e^{CtL} + (1/c0)(e·CtL/m)^m, which is what m! ≥ c0(m/e)^m actually gives.
double closed_form_stirling_corrected(const BoundParams& p, int m, double t, LogRadius r);

struct DescendantBound {
    double value = 0.0; ///< F₂^{(m-1)}(t, r) from the recursion
    double bound = 0.0; ///< (κ(δ^{1/2}) + |ln δ|/L)·e^{CtL}
    bool holds = false;
};
/// Majorant recursion F₂^{(k)} = κ + C∫₀^t (L̃ + H̃)F₂^{(k-1)} dt' with
/// L̃f(L) = ∫₀^L f dL' and H̃f(L) = L·sup{f(L') : L e^{-ct} ≤ L' ≤ L}, c = C*·π/4.
/// delta ≤ 0 selects δ = 1/L. DomainError unless r < δ < 1.
DescendantBound kappa_descendants(const BoundParams& p, int m, double t, LogRadius r,
                                  double delta = 0.0);

struct ParameterChoice {
    double xi = 0.0;
    int m = 0;
    double eta = 0.0;
};
/// ξ = ½min{ln L, ln(1/κ(L^{-1/2}))}, m = ⌈eξ⌉, η = ξ/(CL). DomainError when no
/// integer lies in [eξ, 4ξ].
ParameterChoice choose_parameters(const BoundParams& p, LogRadius r);

/// 2 ln L / L^{1/2} + κ^{1/2}(L^{-1/2}).
double decay_F(const BoundParams& p, LogRadius r);

struct GBound {
    double model_term = 0.0; ///< max{(ln L)^{-(1+δ)}, κ^{1/2}(L^{-1/2})}
    double F_term = 0.0;     ///< decay_F
    double total() const { return model_term + F_term; }
};
GBound final_G_bound(const BoundParams& p, LogRadius r, double delta);

/// CSV `r,xi,m,eta,bound_F,bound_G`.
void write_bounds_csv(std::ostream& os, const BoundParams& p, std::span<const LogRadius> radii,
                      double delta);

} // namespace cusplab
