#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace kgs {

// Adaptive Dormand-Prince 5(4) for a two-component system y' = f(r, y).
// Accepted nodes are stored; integration stops when `stop` returns true.
struct OdeOptions {
    double rtol = 1e-12;
    double atol = 1e-16;
    double h_init = 1e-4;
    double h_max = 0.25;
    std::size_t max_steps = 2000000;
};

struct OdeTrace {
    std::vector<double> r;
    std::vector<std::array<double, 2>> y;
};

template <class Rhs, class Stop>
OdeTrace integrate_dopri(Rhs&& f, double r0, std::array<double, 2> y0, double r_end,
                         const OdeOptions& opt, Stop&& stop) {
    // Dormand-Prince coefficients
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

    OdeTrace tr;
    double r = r0;
    auto y = y0;
    double h = opt.h_init;
    tr.r.push_back(r);
    tr.y.push_back(y);
    auto k1 = f(r, y);
    for (std::size_t step = 0; step < opt.max_steps; ++step) {
        if (r >= r_end) break;
        h = std::min({h, opt.h_max, r_end - r});
        std::array<double, 2> yt, k2, k3, k4, k5, k6, k7, y5;
        for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * a21 * k1[i];
        k2 = f(r + c2 * h, yt);
        for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = f(r + c3 * h, yt);
        for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = f(r + c4 * h, yt);
        for (int i = 0; i < 2; ++i)
            yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = f(r + c5 * h, yt);
        for (int i = 0; i < 2; ++i)
            yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        k6 = f(r + h, yt);
        for (int i = 0; i < 2; ++i)
            y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = f(r + h, y5);

        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                             e7 * k7[i]);
            double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(ei) / sc);
        }
        if (err <= 1.0) {
            r += h;
            y = y5;
            k1 = k7;  // FSAL
            tr.r.push_back(r);
            tr.y.push_back(y);
            if (stop(r, y)) break;
        }
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        h *= std::min(5.0, std::max(0.2, fac));
        if (h < 1e-14) throw std::runtime_error("integrate_dopri: step size underflow");
    }
    return tr;
}

}  // namespace kgs
