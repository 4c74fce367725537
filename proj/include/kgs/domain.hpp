#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgs/numerics.hpp"

namespace kgs {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class DomainKind { interval, ball };

// Interval [x_lo, x_hi] for N=1, centered ball of given radius in radial
// reduction for N=2,3. node_count counts all nodes including the boundary.
struct DomainSpec {
    int dimension = 1;
    DomainKind kind = DomainKind::interval;
    double x_lo = -1.0;
    double x_hi = 1.0;
    double radius = 1.0;
    std::size_t node_count = 256;

    double length() const { return kind == DomainKind::interval ? x_hi - x_lo : radius; }
    void validate() const {
        if (dimension < 1 || dimension > 3) throw ConfigError("dimension must be 1, 2 or 3");
        if (kind == DomainKind::interval) {
            if (dimension != 1) throw ConfigError("interval domains require dimension 1");
            if (!(x_lo < x_hi)) throw ConfigError("interval requires x_lo < x_hi");
        } else {
            if (dimension < 2) throw ConfigError("ball domains require dimension 2 or 3");
            if (!(radius > 0)) throw ConfigError("ball requires radius > 0");
        }
        if (node_count < 64) throw ConfigError("grid too coarse: node_count must be >= 64");
    }
};

// Uniform Dirichlet grid. Interior unknowns exclude both end nodes; for
// radial grids the center node r=0 is also excluded (u there is recovered
// from the reduction v = r u, which vanishes at the origin).
struct Grid {
    DomainSpec spec;
    double h = 0.0;
    std::vector<double> interior;  // coordinates of the unknowns

    static Grid build(const DomainSpec& spec) {
        spec.validate();
        Grid g;
        g.spec = spec;
        std::size_t M = spec.node_count;
        if (spec.kind == DomainKind::interval) {
            g.h = (spec.x_hi - spec.x_lo) / double(M - 1);
            g.interior.resize(M - 2);
            for (std::size_t j = 0; j < M - 2; ++j)
                g.interior[j] = spec.x_lo + double(j + 1) * g.h;
        } else {
            g.h = spec.radius / double(M - 1);
            g.interior.resize(M - 2);
            for (std::size_t j = 0; j < M - 2; ++j) g.interior[j] = double(j + 1) * g.h;
        }
        return g;
    }

    std::size_t n_interior() const { return interior.size(); }

    std::string stencil_description() const {
        if (spec.kind == DomainKind::interval)
            return "central second difference (u[j-1]-2u[j]+u[j+1])/h^2, Dirichlet rows eliminated";
        return "radial u'' + (N-1)/r u' by central differences, reflection at r=0, Dirichlet at r=R";
    }
};

inline Grid build_grid(const DomainSpec& spec) { return Grid::build(spec); }

// Real-valued function on the interior nodes; boundary values are
// identically zero by construction.
struct GridFunction {
    std::shared_ptr<const Grid> grid;
    std::vector<double> values;

    static GridFunction zeros(std::shared_ptr<const Grid> g) {
        GridFunction f;
        f.values.assign(g->n_interior(), 0.0);
        f.grid = std::move(g);
        return f;
    }
    template <class F>
    static GridFunction sample(std::shared_ptr<const Grid> g, F&& fn) {
        GridFunction f = zeros(std::move(g));
        for (std::size_t j = 0; j < f.values.size(); ++j) f.values[j] = fn(f.grid->interior[j]);
        return f;
    }
    double h() const { return grid->h; }
    std::size_t size() const { return values.size(); }
};

// Second-order finite-difference Dirichlet Laplacian (diagnostic / reference
// stencil; the minimizer itself uses the sine-spectral operator).
inline std::vector<double> apply_fd_laplacian(const GridFunction& u) {
    const auto& g = *u.grid;
    std::size_t n = u.size();
    std::vector<double> out(n);
    double h2 = g.h * g.h;
    auto val = [&](std::ptrdiff_t j) -> double {
        return (j < 0 || j >= std::ptrdiff_t(n)) ? 0.0 : u.values[j];
    };
    if (g.spec.kind == DomainKind::interval) {
        for (std::size_t j = 0; j < n; ++j)
            out[j] = (val(j - 1) - 2.0 * u.values[j] + val(j + 1)) / h2;
    } else {
        int N = g.spec.dimension;
        for (std::size_t j = 0; j < n; ++j) {
            double r = g.interior[j];
            // reflection across r=0: the j=0 unknown sits at r=h with a
            // center value extrapolated evenly, u(-h)=u(h) handled via u(0).
            double um, up = val(j + 1);
            if (j == 0) {
                // u(0) from even quadratic through (h,u0),(2h,u1): u(0)=(4u0-u1)/3
                double u0c = (4.0 * u.values[0] - val(1)) / 3.0;
                um = u0c;
                out[j] = (um - 2.0 * u.values[j] + up) / h2 +
                         (N - 1) / r * (up - um) / (2.0 * g.h);
                continue;
            }
            um = val(j - 1);
            out[j] = (um - 2.0 * u.values[j] + up) / h2 + (N - 1) / r * (up - um) / (2.0 * g.h);
        }
    }
    return out;
}

}  // namespace kgs
