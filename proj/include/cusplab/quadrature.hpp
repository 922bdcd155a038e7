#pragma once

#include <vector>

namespace cusplab {

struct GaussRule {
    std::vector<double> x; ///< nodes on [-1, 1]
    std::vector<double> w;
};

/// Gauss-Legendre rule with n points, 1 ≤ n ≤ 128; rules are built once and cached.
const GaussRule& gauss_legendre(int n);

} // namespace cusplab
