#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace kgs {

// Compensated summation. Integral assembly repeatedly adds ~1e4 terms of one
// sign; plain accumulation would eat two digits of the 1e-12 mass budget.
inline double kahan_sum(std::span<const double> xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

template <class F>
double kahan_sum_n(std::size_t n, F&& term) {
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double y = term(i) - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

// Composite Simpson on a uniform grid of n+1 samples (n even) with spacing h.
inline double simpson_uniform(std::span<const double> f, double h) {
    std::size_t n = f.size() - 1;
    if (n < 2 || n % 2 != 0)
        throw std::invalid_argument("simpson_uniform: need an even number of intervals");
    double s = f[0] + f[n];
    double c = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        double w = (i % 2 == 1) ? 4.0 : 2.0;
        double y = w * f[i] - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s * h / 3.0;
}

template <class F>
double simpson_fn(F&& f, double a, double b, std::size_t intervals) {
    if (intervals % 2 != 0) ++intervals;
    double h = (b - a) / double(intervals);
    std::vector<double> vals(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) vals[i] = f(a + double(i) * h);
    return simpson_uniform(vals, h);
}

// Golden-section search for the minimum of a unimodal f on [lo, hi].
struct GoldenResult {
    double x = 0.0;
    double fx = 0.0;
    bool at_edge = false;
};

template <class F>
GoldenResult golden_section_min(F&& f, double lo, double hi, double xtol) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = f(c1), f2 = f(c2);
    while (b - a > xtol) {
        if (f1 < f2) {
            b = c2; c2 = c1; f2 = f1;
            c1 = b - gr * (b - a);
            f1 = f(c1);
        } else {
            a = c1; c1 = c2; f1 = f2;
            c2 = a + gr * (b - a);
            f2 = f(c2);
        }
    }
    GoldenResult r;
    r.x = (f1 < f2) ? c1 : c2;
    r.fx = std::min(f1, f2);
    r.at_edge = (r.x - lo < 2 * xtol) || (hi - r.x < 2 * xtol);
    return r;
}

// Ordinary least squares for y ~ X beta, normal equations with partial
// pivoting. Small fixed column counts only (2 or 3 here).
inline std::vector<double> lstsq(const std::vector<std::vector<double>>& X,
                                 const std::vector<double>& y) {
    std::size_t n = X.size(), m = X.front().size();
    std::vector<std::vector<double>> A(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < n; ++k) A[i][j] += X[k][i] * X[k][j];
        for (std::size_t k = 0; k < n; ++k) A[i][m] += X[k][i] * y[k];
    }
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[col], A[piv]);
        if (std::abs(A[col][col]) < 1e-300)
            throw std::runtime_error("lstsq: singular normal equations");
        for (std::size_t r = 0; r < m; ++r) {
            if (r == col) continue;
            double fac = A[r][col] / A[col][col];
            for (std::size_t c = col; c <= m; ++c) A[r][c] -= fac * A[col][c];
        }
    }
    std::vector<double> beta(m);
    for (std::size_t i = 0; i < m; ++i) beta[i] = A[i][m] / A[i][i];
    return beta;
}

// Cubic interpolation (4-point Lagrange) on a uniform grid. xs[0] + i*h.
// Falls back to linear near the ends.
inline double cubic_interp_uniform(std::span<const double> f, double x0, double h, double x) {
    std::size_t n = f.size();
    double t = (x - x0) / h;
    if (t <= 0.0) return f[0];
    if (t >= double(n - 1)) return f[n - 1];
    auto j = static_cast<std::ptrdiff_t>(std::floor(t));
    if (j < 1 || j + 2 >= static_cast<std::ptrdiff_t>(n)) {
        double s = t - double(j);
        return f[j] * (1 - s) + f[j + 1] * s;
    }
    double s = t - double(j);
    double fm1 = f[j - 1], f0 = f[j], f1 = f[j + 1], f2 = f[j + 2];
    // Catmull-Rom
    return f0 + 0.5 * s * (f1 - fm1 + s * (2 * fm1 - 5 * f0 + 4 * f1 - f2 + s * (3 * (f0 - f1) + f2 - fm1)));
}

// Cubic Hermite interpolation on a sorted non-uniform grid given values and
// derivatives (used for ODE solver output).
inline double hermite_interp(std::span<const double> xs, std::span<const double> ys,
                             std::span<const double> dys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t j = std::size_t(it - xs.begin()) - 1;
    double hx = xs[j + 1] - xs[j];
    double t = (x - xs[j]) / hx;
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * ys[j] + hx * h10 * dys[j] + h01 * ys[j + 1] + hx * h11 * dys[j + 1];
}

inline double sphere_surface(int dim) {
    switch (dim) {
        case 1: return 2.0;                       // two half-lines
        case 2: return 2.0 * M_PI;
        case 3: return 4.0 * M_PI;
        default: throw std::invalid_argument("sphere_surface: dim must be 1, 2 or 3");
    }
}

}  // namespace kgs
