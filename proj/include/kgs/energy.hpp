#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kgs/scheme.hpp"

namespace kgs {

struct DegenerateInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EnergyBreakdown {
    double kinetic = 0.0;      // a K
    double kirchhoff = 0.0;    // (b/2) K^2
    double potential = 0.0;    // int V u^2
    double interaction = 0.0;  // -(N/(N+4)) beta* int |u|^(2+8/N)
    double total = 0.0;
    double K = 0.0;            // int |grad u|^2
    double mass = 0.0;         // int u^2
};

struct Multiplier {
    double mu = 0.0;       // Lagrange multiplier
    double epsilon = 0.0;  // K^(-1/2)
};

struct EnergyParams {
    double a = 0.0;
    double b = 1.0;
    double beta_star = 0.0;
    int dim = 1;
};

// Stateful evaluator bound to one grid; reuse it when evaluating many
// functions (each construction plans a DST).
class EnergyEvaluator {
  public:
    explicit EnergyEvaluator(std::shared_ptr<const Grid> grid) : scheme_(std::move(grid)) {}

    Scheme& scheme() { return scheme_; }

    EnergyBreakdown energy_state(const std::vector<double>& y, const std::vector<double>& V,
                                 const EnergyParams& p) {
        EnergyBreakdown eb;
        eb.mass = scheme_.mass(y);
        if (!(eb.mass > 0)) throw DegenerateInputError("energy: zero mass input");
        eb.K = scheme_.grad_sq(y);
        auto zeta = scheme_.nonlinear_weight(y);
        double P = scheme_.interaction(y, zeta);
        eb.kinetic = p.a * eb.K;
        eb.kirchhoff = 0.5 * p.b * eb.K * eb.K;
        eb.potential = scheme_.potential_term(y, V);
        eb.interaction = -(double(p.dim) / (p.dim + 4.0)) * p.beta_star * P;
        eb.total = eb.kinetic + eb.kirchhoff + eb.potential + eb.interaction;
        return eb;
    }

    EnergyBreakdown energy(const GridFunction& u, const GridFunction& V, const EnergyParams& p) {
        check(u, V, p);
        return energy_state(scheme_.to_state(u.values), V.values, p);
    }

    // EL operator without the -mu u term, in state coordinates:
    //   (a + bK)(-Lap y) + V y - beta* zeta y
    std::vector<double> el_base_state(const std::vector<double>& y, const std::vector<double>& V,
                                      const EnergyParams& p, double K) {
        auto out = scheme_.neg_laplacian(y);
        auto zeta = scheme_.nonlinear_weight(y);
        double c = p.a + p.b * K;
        for (std::size_t j = 0; j < y.size(); ++j)
            out[j] = c * out[j] + V[j] * y[j] - p.beta_star * zeta[j] * y[j];
        return out;
    }

    double rayleigh_mu_state(const std::vector<double>& el_base, const std::vector<double>& y,
                             double mass) {
        double dot = scheme_.cell_weight() *
                     kahan_sum_n(y.size(), [&](std::size_t j) { return el_base[j] * y[j]; });
        return dot / mass;
    }

    // Pointwise residual of the u-equation:
    //   -(a+bK) Lap u + V u - mu u - beta* |u|^(8/N) u
    GridFunction el_residual(const GridFunction& u, const GridFunction& V, const EnergyParams& p,
                             double mu) {
        check(u, V, p);
        auto y = scheme_.to_state(u.values);
        double K = scheme_.grad_sq(y);
        auto base = el_base_state(y, V.values, p, K);
        GridFunction r = GridFunction::zeros(scheme_.grid_ptr());
        for (std::size_t j = 0; j < y.size(); ++j) {
            double ry = base[j] - mu * y[j];
            r.values[j] = scheme_.radial() ? ry / scheme_.grid().interior[j] : ry;
        }
        return r;
    }

    // mu = 2e - aK - ((4-N)/(N+4)) beta* P - int V u^2 ; eps = K^(-1/2)
    Multiplier multiplier(const GridFunction& u, const GridFunction& V, const EnergyParams& p,
                          double e_total) {
        check(u, V, p);
        auto y = scheme_.to_state(u.values);
        double mass = scheme_.mass(y);
        if (std::abs(mass - 1.0) > 1e-8)
            throw DegenerateInputError("multiplier: input must have unit mass");
        double K = scheme_.grad_sq(y);
        auto zeta = scheme_.nonlinear_weight(y);
        double P = scheme_.interaction(y, zeta);
        double pot = scheme_.potential_term(y, V.values);
        Multiplier m;
        m.mu = 2.0 * e_total - p.a * K -
               ((4.0 - p.dim) / (p.dim + 4.0)) * p.beta_star * P - pot;
        m.epsilon = 1.0 / std::sqrt(K);
        return m;
    }

    // int |u|^(2+8/N) / (K^2 (int u^2)^(4/N - 1))
    double gn_ratio(const GridFunction& u, int dim) {
        if (dim != scheme_.dim()) throw std::invalid_argument("gn_ratio: dimension mismatch");
        auto y = scheme_.to_state(u.values);
        double mass = scheme_.mass(y);
        if (!(mass > 0)) throw DegenerateInputError("gn_ratio: zero function");
        double K = scheme_.grad_sq(y);
        auto zeta = scheme_.nonlinear_weight(y);
        double P = scheme_.interaction(y, zeta);
        return P / (K * K * std::pow(mass, 4.0 / dim - 1.0));
    }

  private:
    void check(const GridFunction& u, const GridFunction& V, const EnergyParams& p) const {
        if (u.grid.get() != V.grid.get() && u.size() != V.size())
            throw std::invalid_argument("energy: u and V live on different grids");
        if (p.dim != scheme_.dim()) throw std::invalid_argument("energy: dimension mismatch");
    }
    Scheme scheme_;
};

inline EnergyBreakdown energy(const GridFunction& u, const GridFunction& V, double a, double b,
                              double beta_star, int dim) {
    EnergyEvaluator ev(u.grid);
    return ev.energy(u, V, {a, b, beta_star, dim});
}

inline Multiplier multiplier(const GridFunction& u, const GridFunction& V, double a, double b,
                             double beta_star, int dim, double e_total) {
    EnergyEvaluator ev(u.grid);
    return ev.multiplier(u, V, {a, b, beta_star, dim}, e_total);
}

inline GridFunction el_residual(const GridFunction& u, const GridFunction& V, double a, double b,
                                double beta_star, double mu, int dim) {
    EnergyEvaluator ev(u.grid);
    return ev.el_residual(u, V, {a, b, beta_star, dim}, mu);
}

inline double gn_ratio(const GridFunction& u, int dim) {
    EnergyEvaluator ev(u.grid);
    return ev.gn_ratio(u, dim);
}

}  // namespace kgs
