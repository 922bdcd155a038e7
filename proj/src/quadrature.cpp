#include "cusplab/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "cusplab/errors.hpp"

namespace cusplab {

namespace {

GaussRule build(int n) {
    GaussRule g;
    g.x.resize(n);
    g.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        g.x[i] = -z;
        g.x[n - 1 - i] = z;
        g.w[i] = g.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return g;
}

struct Table {
    std::array<GaussRule, 129> rules;
    Table() {
        for (int n = 1; n <= 128; ++n) rules[n] = build(n);
    }
};

} // namespace

const GaussRule& gauss_legendre(int n) {
    static const Table table;
    if (n < 1 || n > 128) throw DomainError("gauss_legendre: order must be in [1, 128]");
    return table.rules[n];
}

} // namespace cusplab
