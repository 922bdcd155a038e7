#pragma once

// Dormand-Prince 5(4) with a PI step-size controller.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cusplab/errors.hpp"

namespace cusplab {

template <std::size_t N>
using State = std::array<double, N>;

struct DopriOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    double h_init = 0.0;        ///< 0: derived from the interval length
    double h_max = 0.0;         ///< 0: unlimited
    double min_rel_step = 1e-14; ///< step failure when h < min_rel_step * max(|t|, 1e-300)
    long max_steps = 10'000'000;
};

struct DopriStats {
    long accepted = 0;
    long rejected = 0;
};

/// Integrates y' = f(t, y) from t0 to t1 (t1 > t0). Y is State<N> or std::vector<double>.
/// `observe(t, y, dydt)` is called after every accepted step and returns false to stop early.
template <class Y, class Rhs, class Observer>
DopriStats dopri45(Rhs&& f, double t0, Y y, double t1, const DopriOptions& opt,
                   Observer&& observe) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    DopriStats stats;
    double t = t0;
    const std::size_t N = y.size();
    Y k1 = f(t, y);
    double h = opt.h_init > 0 ? opt.h_init : (t1 - t0) * 1e-3;
    double err_prev = 1.0;
    Y tmp = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, ynew = y;

    while (t < t1) {
        if (stats.accepted + stats.rejected > opt.max_steps)
            throw StepFailure("dopri45: step budget exhausted at t=" + std::to_string(t));
        if (opt.h_max > 0) h = std::min(h, opt.h_max);
        bool last = false;
        if (t + h >= t1) {
            h = t1 - t;
            last = true;
        }
        if (h < opt.min_rel_step * std::max(std::abs(t), 1e-300))
            throw StepFailure("dopri45: step size underflow at t=" + std::to_string(t));

        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
        k2 = f(t + c2 * h, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = f(t + c3 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = f(t + c4 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = f(t + c5 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                 a65 * k5[i]);
        const double t_new = last ? t1 : t + h;
        k6 = f(t_new, tmp);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = f(t_new, ynew);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                  e6 * k6[i] + e7 * k7[i]);
            const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err = std::max(err, std::abs(e) / sc);
        }
        if (!std::isfinite(err)) {
            ++stats.rejected;
            h *= 0.25;
            continue;
        }
        if (err <= 1.0) {
            ++stats.accepted;
            t = t_new;
            y = ynew;
            k1 = k7;
            double fac = err > 0 ? 0.9 * std::pow(err, -0.14) * std::pow(err_prev, 0.08) : 5.0;
            fac = std::clamp(fac, 0.2, 5.0);
            err_prev = std::max(err, 1e-4);
            h *= fac;
            if (!observe(t, y, k1)) break;
        } else {
            ++stats.rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }
    return stats;
}

} // namespace cusplab
