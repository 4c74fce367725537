#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgs/energy.hpp"
#include "kgs/potential.hpp"
#include "kgs/radial_profile.hpp"
#include "kgs/scheme.hpp"

namespace kgs {

enum class KirchhoffFreeze { per_step, per_sweep };

// auto_select runs a=0 interval problems on the finite-difference backend
// (whose discrete functional genuinely collapses, so the nonexistence
// diagnostic fires) and everything else sine-spectrally.
enum class FlowBackend { auto_select, spectral, finite_difference };

struct FlowConfig {
    double dt = 1e-3;
    std::size_t max_steps = 400000;
    double residual_tol = 1e-10;   // on max|EL y| / (1 + |mu|), state coordinates
    double stall_tol = 1e-15;      // relative energy decrease per accepted step
    KirchhoffFreeze kirchhoff_freeze = KirchhoffFreeze::per_step;
    FlowBackend backend = FlowBackend::auto_select;
    double dt_cap = 1e6;           // large dt turns the step into inverse iteration
    std::size_t line_search_every = 60;
    double trust_fraction = 0.2;   // max relative sup-norm change per step

    void validate() const {
        if (!(dt > 0)) throw ConfigError("flow dt must be positive");
        if (!(residual_tol > 0) || !(stall_tol >= 0))
            throw ConfigError("flow tolerances must be positive");
    }
};

struct CollapseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MinimizerResult {
    GridFunction u;            // mass 1, nonnegative
    EnergyBreakdown energy;
    Multiplier multiplier;
    double z = 0.0;            // peak location, parabolic sub-grid refinement
    bool converged = false;
    bool collapsed = false;    // eps fell below 4 grid spacings (a=0 signature)
    std::size_t steps = 0;
    double residual = 0.0;     // achieved scaled EL residual
    std::string message;
};

namespace detail {

inline double peak_location(const Scheme& sc, const std::vector<double>& u_phys, double* peak_val) {
    const auto& x = sc.grid().interior;
    std::size_t jm = 0;
    for (std::size_t j = 1; j < u_phys.size(); ++j)
        if (u_phys[j] > u_phys[jm]) jm = j;
    double z;
    if (jm == 0 || jm + 1 == u_phys.size()) {
        z = x[jm];
        if (sc.radial() && jm == 0) z = 0.0;  // center peak
    } else {
        double um = u_phys[jm - 1], u0 = u_phys[jm], up = u_phys[jm + 1];
        double den = um - 2.0 * u0 + up;
        double off = (std::abs(den) > 1e-300) ? 0.5 * sc.h() * (um - up) / den : 0.0;
        z = x[jm] + std::clamp(off, -sc.h(), sc.h());
    }
    if (peak_val) *peak_val = u_phys[jm];
    return z;
}

// s^(1/2) y(z + s(x-z)) by cubic interpolation; exact mass preservation is
// restored by the caller's renormalization.
inline std::vector<double> dilate_state(const Scheme& sc, const std::vector<double>& y, double s,
                                        double z) {
    const auto& x = sc.grid().interior;
    double x0 = x.front(), h = sc.h();
    std::vector<double> out(y.size());
    double rs = std::sqrt(s);
    for (std::size_t j = 0; j < y.size(); ++j) {
        double xi = z + (x[j] - z) * s;
        out[j] = (xi < x0 - h || xi > x.back() + h) ? 0.0
                                                    : rs * cubic_interp_uniform(y, x0, h, xi);
    }
    return out;
}

inline std::vector<double> translate_state(const Scheme& sc, const std::vector<double>& y,
                                           double t) {
    const auto& x = sc.grid().interior;
    std::vector<double> out(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) {
        double xi = x[j] + t;
        out[j] = (xi < x.front() - sc.h() || xi > x.back() + sc.h())
                     ? 0.0
                     : cubic_interp_uniform(y, x.front(), sc.h(), xi);
    }
    return out;
}

// full variational state at a mass-1 configuration
struct FlowState {
    std::vector<double> y;
    std::vector<double> zeta;
    double K = 0.0, P = 0.0, pot = 0.0, E = 0.0, mu = 0.0;
};

}  // namespace detail

// Normalized gradient flow: semi-implicit sine-spectral step with the
// Kirchhoff factor frozen per step and the Rayleigh multiplier shifted into
// the implicit operator (an unshifted normalize-after-solve map stalls at
// spurious fixed points whose EL residual scales like dt |mu|). Backtracking
// keeps the reported energy non-increasing; interleaved dilation/translation
// line searches relax the slow width and position modes that plain descent
// traverses at rate ~ e(a)/|mu|.
inline MinimizerResult normalized_gradient_flow(std::shared_ptr<const Grid> grid,
                                                const GridFunction& V, double a, double b,
                                                double beta_star, int dim,
                                                const GridFunction& init, const FlowConfig& cfg) {
    cfg.validate();
    if (a < 0) throw ConfigError("a must be nonnegative");
    EnergyEvaluator ev(grid);
    Scheme& sc = ev.scheme();
    const std::size_t n = sc.n();
    const double ndim = double(dim);
    const double inter_coef = ndim / (ndim + 4.0);
    const bool use_fd = cfg.backend == FlowBackend::finite_difference ||
                        (cfg.backend == FlowBackend::auto_select && a == 0.0 && !sc.radial());
    const double lam_max = use_fd ? 4.0 / (sc.h() * sc.h()) : sc.eigenvalues().back();
    const double eps_mach = std::numeric_limits<double>::epsilon();

    detail::FlowState st;
    st.y = sc.to_state(init.values);
    for (auto& v : st.y) v = std::abs(v);
    {
        double m = sc.mass(st.y);
        if (!(m > 0)) throw DegenerateInputError("flow: init has zero mass");
        double inv = 1.0 / std::sqrt(m);
        for (auto& v : st.y) v *= inv;
    }
    auto grad_sq_of = [&](const std::vector<double>& y) {
        return use_fd ? sc.fd_grad_sq(y) : sc.grad_sq(y);
    };
    auto refresh = [&](detail::FlowState& s) {
        s.K = grad_sq_of(s.y);
        sc.nonlinear_weight(s.y, s.zeta);
        s.P = sc.interaction(s.y, s.zeta);
        s.pot = sc.potential_term(s.y, V.values);
        s.E = a * s.K + 0.5 * b * s.K * s.K + s.pot - inter_coef * beta_star * s.P;
        s.mu = a * s.K + b * s.K * s.K + s.pot - beta_star * s.P;  // exact contraction
    };
    refresh(st);
    const double K_frozen = st.K;  // per_sweep mode

    double dt = cfg.dt;
    std::size_t accepted = 0, step = 0;
    bool converged = false, collapsed = false;
    std::string message;

    // residual in state coordinates with a rounding-floor-aware tolerance
    auto scaled_residual = [&]() {
        std::vector<double> base;
        if (use_fd) {
            base = sc.fd_neg_laplacian(st.y);
            double c = a + b * st.K;
            for (std::size_t j = 0; j < n; ++j)
                base[j] = c * base[j] + V.values[j] * st.y[j] -
                          beta_star * st.zeta[j] * st.y[j];
        } else {
            base = ev.el_base_state(st.y, V.values, {a, b, beta_star, dim}, st.K);
        }
        double rmax = 0.0, ymax = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            rmax = std::max(rmax, std::abs(base[j] - st.mu * st.y[j]));
            ymax = std::max(ymax, std::abs(st.y[j]));
        }
        double floor = 64.0 * eps_mach * (a + b * st.K) * lam_max * ymax;
        return std::pair<double, double>{rmax / (1.0 + std::abs(st.mu)),
                                         floor / (1.0 + std::abs(st.mu))};
    };
    auto res_pair = scaled_residual();
    double scaled_res = res_pair.first;
    auto effective_tol = [&](double floor) { return std::max(cfg.residual_tol, 2.0 * floor); };

    auto try_improve = [&](std::vector<double> cand) -> bool {
        double m = sc.mass(cand);
        if (!(m > 0)) return false;
        double inv = 1.0 / std::sqrt(m);
        for (auto& v : cand) v *= inv;
        detail::FlowState s2;
        s2.y = std::move(cand);
        refresh(s2);
        if (s2.E < st.E - 1e-14 * std::max(1.0, std::abs(st.E))) {
            st = std::move(s2);
            return true;
        }
        return false;
    };

    std::vector<double> zeta_scratch;
    auto energy_of_candidate = [&](std::vector<double>& w) {
        double m = sc.mass(w);
        if (!(m > 0)) return 1e300;
        double inv = 1.0 / std::sqrt(m);
        for (auto& v : w) v *= inv;
        double K = grad_sq_of(w);
        sc.nonlinear_weight(w, zeta_scratch);
        double P = sc.interaction(w, zeta_scratch);
        double pot = sc.potential_term(w, V.values);
        return a * K + 0.5 * b * K * K + pot - inter_coef * beta_star * P;
    };

    auto line_searches = [&]() {
        double pv = 0.0;
        auto u_phys = sc.to_physical(st.y);
        double z = detail::peak_location(sc, u_phys, &pv);
        double zs = sc.radial() ? 0.0 : z;
        auto e_of_dil = [&](double ls) {
            auto w = detail::dilate_state(sc, st.y, std::exp(ls), zs);
            return energy_of_candidate(w);
        };
        auto gd = golden_section_min(e_of_dil, std::log(0.85), std::log(1.18), 2e-4);
        if (gd.fx < st.E) try_improve(detail::dilate_state(sc, st.y, std::exp(gd.x), zs));
        if (!sc.radial()) {
            double span = std::max(4.0 / std::sqrt(std::max(st.K, 1e-12)), 10.0 * sc.h());
            auto e_of_tr = [&](double t) {
                auto w = detail::translate_state(sc, st.y, t);
                return energy_of_candidate(w);
            };
            auto gt = golden_section_min(e_of_tr, -span, span, 1e-5 * span);
            if (gt.fx < st.E) try_improve(detail::translate_state(sc, st.y, gt.x));
        }
    };

    // Residual-projection secant along the dilation and translation
    // generators. Energy line searches can pin the soft modes only to the
    // energy rounding floor delta ~ sqrt(eps K^2 / E''); the residual
    // projection <EL - mu y, d y> is computable at machine precision and
    // drives the last decades.
    auto el_vec_of = [&](detail::FlowState& s) {
        std::vector<double> base;
        if (use_fd) {
            base = sc.fd_neg_laplacian(s.y);
            double c = a + b * s.K;
            for (std::size_t j = 0; j < n; ++j)
                base[j] = c * base[j] + V.values[j] * s.y[j] - beta_star * s.zeta[j] * s.y[j] -
                          s.mu * s.y[j];
        } else {
            base = ev.el_base_state(s.y, V.values, {a, b, beta_star, dim}, s.K);
            for (std::size_t j = 0; j < n; ++j) base[j] -= s.mu * s.y[j];
        }
        return base;
    };
    auto polish_soft_modes = [&]() {
        double pv = 0.0;
        double z = 0.0;
        {
            auto u_phys = sc.to_physical(st.y);
            z = detail::peak_location(sc, u_phys, &pv);
        }
        double zs = sc.radial() ? 0.0 : z;
        auto state_at = [&](std::vector<double> yc) -> std::optional<detail::FlowState> {
            double m = sc.mass(yc);
            if (!(m > 0)) return std::nullopt;
            double inv = 1.0 / std::sqrt(m);
            for (auto& v : yc) v *= inv;
            detail::FlowState s;
            s.y = std::move(yc);
            refresh(s);
            return s;
        };
        auto proj = [&](detail::FlowState& s, const std::vector<double>& gen) {
            auto r = el_vec_of(s);
            return sc.cell_weight() *
                   kahan_sum_n(n, [&](std::size_t j) { return r[j] * gen[j]; });
        };
        auto polish_one = [&](auto&& move, double delta, double clamp) {
            auto gen0 = move(st.y, delta);
            for (std::size_t j = 0; j < n; ++j) gen0[j] = (gen0[j] - st.y[j]) / delta;
            double g0 = proj(st, gen0);
            auto s1 = state_at(move(st.y, delta));
            if (!s1) return;
            auto gen1 = move(s1->y, delta);
            for (std::size_t j = 0; j < n; ++j) gen1[j] = (gen1[j] - s1->y[j]) / delta;
            double g1 = proj(*s1, gen1);
            double dg = (g1 - g0) / delta;
            if (!(std::abs(dg) > 0)) return;
            double t = std::clamp(-g0 / dg, -clamp, clamp);
            auto s2 = state_at(move(st.y, t));
            if (!s2) return;
            double slack = 1e-12 * std::max(1.0, std::abs(st.E)) +
                           16.0 * std::numeric_limits<double>::epsilon() *
                               (0.5 * b * st.K * st.K + inter_coef * beta_star * std::abs(st.P));
            if (s2->E <= st.E + slack) st = std::move(*s2);
        };
        polish_one(
            [&](const std::vector<double>& y, double t) {
                return detail::dilate_state(sc, y, std::exp(t), zs);
            },
            1e-5, 0.05);
        if (!sc.radial()) {
            double tspan = std::max(1.0 / std::sqrt(std::max(st.K, 1e-12)), 4.0 * sc.h());
            polish_one(
                [&](const std::vector<double>& y, double t) {
                    return detail::translate_state(sc, y, t);
                },
                1e-5 * tspan, 0.3 * tspan);
        }
    };

    // stall bookkeeping over a sliding window of accepted steps
    const std::size_t window = 600;
    double window_E = st.E, window_res = scaled_res;

    std::vector<double> w;
    for (; step < cfg.max_steps; ++step) {
        double c = a + b * (cfg.kirchhoff_freeze == KirchhoffFreeze::per_step ? st.K : K_frozen);
        double K_raw = 0.0;
        if (use_fd)
            w = sc.fd_semi_implicit_step(st.y, st.zeta, V.values, dt, c, st.mu, beta_star);
        else
            w = sc.semi_implicit_step(st.y, st.zeta, V.values, dt, c, st.mu, beta_star, &K_raw);
        double m = sc.mass(w);
        if (!(m > 0) || !std::isfinite(m)) {
            dt *= 0.5;
            continue;
        }
        double inv = 1.0 / std::sqrt(m);
        double du_max = 0.0, y_max = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double wj = std::abs(w[j]) * inv;  // spectral tails can round negative
            w[j] = wj;
            du_max = std::max(du_max, std::abs(wj - st.y[j]));
            y_max = std::max(y_max, std::abs(st.y[j]));
        }
        detail::FlowState s2;
        s2.y.swap(w);
        s2.K = use_fd ? sc.fd_grad_sq(s2.y) : K_raw / m;
        sc.nonlinear_weight(s2.y, s2.zeta);
        s2.P = sc.interaction(s2.y, s2.zeta);
        s2.pot = sc.potential_term(s2.y, V.values);
        s2.E = a * s2.K + 0.5 * b * s2.K * s2.K + s2.pot - inter_coef * beta_star * s2.P;
        s2.mu = a * s2.K + b * s2.K * s2.K + s2.pot - beta_star * s2.P;

        double slack = 1e-12 * std::max(1.0, std::abs(st.E)) +
                       8.0 * eps_mach * (0.5 * b * st.K * st.K +
                                         inter_coef * beta_star * std::abs(st.P));
        bool ok = s2.E <= st.E + slack && du_max <= cfg.trust_fraction * y_max + 1e-12;
        if (!ok) {
            dt *= 0.5;
            if (dt < 1e-19) {
                message = "dt underflow before reaching tolerance";
                break;
            }
            continue;
        }
        st = std::move(s2);
        w.clear();
        ++accepted;

        if (1.0 / std::sqrt(st.K) < 4.0 * sc.h()) {
            collapsed = true;
            message = "collapse -- under-resolved";
            break;
        }
        if (accepted % cfg.line_search_every == 0) {
            line_searches();
            polish_soft_modes();
        }
        if (accepted % 10 == 0 || accepted < 10) {
            res_pair = scaled_residual();
            scaled_res = res_pair.first;
            if (scaled_res < effective_tol(res_pair.second)) {
                converged = true;
                break;
            }
        }
        if (accepted % 50 == 0) dt = std::min(2.0 * dt, cfg.dt_cap);
        if (accepted % window == 0) {
            double drop = window_E - st.E;
            bool energy_flat = drop < cfg.stall_tol * std::max(1.0, std::abs(st.E)) * window;
            bool res_flat = scaled_res > 0.9 * window_res;
            if (energy_flat && res_flat) {
                res_pair = scaled_residual();
                scaled_res = res_pair.first;
                converged = scaled_res < effective_tol(res_pair.second);
                if (!converged) message = "energy stalled above residual tolerance";
                break;
            }
            window_E = st.E;
            window_res = scaled_res;
        }
    }
    if (!converged && !collapsed) {
        // final soft-mode polish often closes the last residual decades
        polish_soft_modes();
        res_pair = scaled_residual();
        scaled_res = res_pair.first;
        converged = scaled_res < effective_tol(res_pair.second);
        if (!converged && message.empty()) message = "max steps reached";
        if (converged) message.clear();
    }

    // per_sweep mode: one self-consistency restart on the frozen factor
    if (cfg.kirchhoff_freeze == KirchhoffFreeze::per_sweep && converged &&
        std::abs(st.K - K_frozen) > 1e-10 * std::max(1.0, st.K)) {
        FlowConfig inner = cfg;
        inner.kirchhoff_freeze = KirchhoffFreeze::per_step;
        GridFunction restart = GridFunction::zeros(grid);
        restart.values = sc.to_physical(st.y);
        return normalized_gradient_flow(grid, V, a, b, beta_star, dim, restart, inner);
    }

    MinimizerResult res;
    res.u = GridFunction::zeros(grid);
    res.u.values = sc.to_physical(st.y);
    res.energy.K = st.K;
    res.energy.mass = sc.mass(st.y);
    res.energy.kinetic = a * st.K;
    res.energy.kirchhoff = 0.5 * b * st.K * st.K;
    res.energy.potential = st.pot;
    res.energy.interaction = -inter_coef * beta_star * st.P;
    res.energy.total = st.E;
    res.multiplier.mu = st.mu;
    res.multiplier.epsilon = 1.0 / std::sqrt(st.K);
    double pv = 0.0;
    res.z = detail::peak_location(sc, res.u.values, &pv);
    res.converged = converged;
    res.collapsed = collapsed;
    res.steps = step;
    res.residual = scaled_res;
    res.message = message;
    return res;
}

struct SweepEntry {
    double a = 0.0;
    MinimizerResult result;
};

struct SweepError : std::runtime_error {
    double a;
    SweepError(double a_, const std::string& what) : std::runtime_error(what), a(a_) {}
};

// Warm-started continuation in a (descending). Candidate initializations for
// each point: the previous minimizer, its width-rescaled version, and an
// optional fresh trial; the lowest-energy candidate starts the flow.
inline std::vector<SweepEntry> continuation_sweep(
    std::shared_ptr<const Grid> grid, const GridFunction& V, double b, double beta_star, int dim,
    const std::vector<double>& a_values, const FlowConfig& cfg, const GridFunction& first_init,
    double width_exponent = 0.25,
    const std::function<std::optional<GridFunction>(double)>& fresh_init = nullptr) {
    if (a_values.empty()) throw ConfigError("sweep needs at least one a value");
    for (std::size_t i = 0; i + 1 < a_values.size(); ++i)
        if (!(a_values[i] > a_values[i + 1]) || !(a_values[i + 1] > 0))
            throw ConfigError("sweep a values must be strictly positive and descending");

    std::vector<SweepEntry> out;
    EnergyEvaluator ev(grid);
    Scheme& sc = ev.scheme();
    GridFunction warm = first_init;
    double a_prev = 0.0;
    for (double a : a_values) {
        std::vector<GridFunction> cands;
        cands.push_back(warm);
        if (a_prev > 0.0) {
            double s = std::pow(a_prev / a, width_exponent);
            auto y = sc.to_state(warm.values);
            double pv = 0.0;
            double z = detail::peak_location(sc, warm.values, &pv);
            auto d = detail::dilate_state(sc, y, s, sc.radial() ? 0.0 : z);
            GridFunction g = GridFunction::zeros(grid);
            g.values = sc.to_physical(d);
            cands.push_back(std::move(g));
        }
        if (fresh_init) {
            if (auto g = fresh_init(a)) cands.push_back(std::move(*g));
        }
        std::size_t best = 0;
        double best_e = std::numeric_limits<double>::infinity();
        EnergyParams prm{a, b, beta_star, dim};
        for (std::size_t i = 0; i < cands.size(); ++i) {
            auto y = sc.to_state(cands[i].values);
            double m = sc.mass(y);
            if (!(m > 0)) continue;
            double inv = 1.0 / std::sqrt(m);
            for (auto& v : y) v *= inv;
            double e = ev.energy_state(y, V.values, prm).total;
            if (e < best_e) {
                best_e = e;
                best = i;
            }
        }
        auto res = normalized_gradient_flow(grid, V, a, b, beta_star, dim, cands[best], cfg);
        if (!res.converged)
            throw SweepError(a, "sweep run failed at a=" + std::to_string(a) + ": " + res.message);
        warm = res.u;
        a_prev = a;
        out.push_back({a, std::move(res)});
    }
    return out;
}

struct TrialFunction {
    GridFunction u;
    double a_tau_sq = 0.0;  // normalization constant A_tau^2
};

struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Cutoff-rescaled profile bump centered at `center`, normalized to unit mass
// on the grid. Cutoff is 1 inside half the distance to the boundary and
// falls smoothly to 0 at the full distance.
inline TrialFunction init_trial(const RadialProfile& prof, double tau, double center,
                                std::shared_ptr<const Grid> grid) {
    if (!(tau > 0)) throw ConfigError("init_trial: tau must be positive");
    const auto& spec = grid->spec;
    double dist;
    if (spec.kind == DomainKind::interval) {
        if (center <= spec.x_lo || center >= spec.x_hi)
            throw ConfigError("init_trial: center must lie inside the domain");
        dist = std::min(center - spec.x_lo, spec.x_hi - center);
    } else {
        if (center != 0.0) throw ConfigError("init_trial: radial trials are centered");
        dist = spec.radius;
    }

    // resolution guard: at least 8 nodes across the half-maximum width
    double r_half = 0.0;
    for (std::size_t i = 1; i < prof.radii.size(); ++i) {
        if (prof.values[i] <= 0.5 * prof.peak_value) {
            r_half = prof.radii[i];
            break;
        }
    }
    if (r_half <= 0) r_half = 1.0;
    if (r_half / tau < 8.0 * grid->h)
        throw ResolutionError("init_trial: bump under-resolved (fewer than 8 nodes per half-width)");

    const int N = prof.dimension;
    double mass_q = prof.mass_sq > 0 ? prof.mass_sq : profile_mass_sq(prof);
    double amp = std::pow(tau, 0.5 * N) / std::sqrt(mass_q);
    double r_in = 0.5 * dist, r_out = dist;
    auto cutoff = [&](double s) {
        if (s <= r_in) return 1.0;
        if (s >= r_out) return 0.0;
        double t = (s - r_in) / (r_out - r_in);
        return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);  // quintic smoothstep
    };
    GridFunction u = GridFunction::sample(grid, [&](double x) {
        double s = std::abs(x - center);
        return amp * cutoff(s) * prof(tau * s);
    });

    Scheme sc(grid);
    auto y = sc.to_state(u.values);
    double m = sc.mass(y);
    if (!(m > 0)) throw ResolutionError("init_trial: trial has zero grid mass");
    TrialFunction tf;
    tf.a_tau_sq = 1.0 / m;
    double inv = 1.0 / std::sqrt(m);
    for (auto& v : u.values) v *= inv;
    tf.u = std::move(u);
    return tf;
}

struct ProbeResult {
    double max_pairwise_l2 = 0.0;
    bool conclusive = true;
    bool twin_suspected = false;  // symmetric potentials can carry twin minimizers
    std::vector<MinimizerResult> runs;
};

// Runs the flow from seeded random positive initializations and reports the
// maximum pairwise L2 distance between converged minimizers.
inline ProbeResult uniqueness_probe(std::shared_ptr<const Grid> grid, const GridFunction& V,
                                    double a, double b, double beta_star, int dim,
                                    std::size_t n_inits, const FlowConfig& cfg,
                                    std::uint64_t seed = 12345) {
    if (n_inits < 2) throw ConfigError("uniqueness_probe: n_inits must be >= 2");
    ProbeResult pr;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const std::size_t n = grid->n_interior();
    for (std::size_t run = 0; run < n_inits; ++run) {
        GridFunction u0 = GridFunction::zeros(grid);
        for (auto& v : u0.values) v = 0.2 + uni(rng);
        // smooth the noise so the first implicit steps are well-behaved
        std::vector<double> tmp(n);
        for (int pass = 0; pass < 50; ++pass) {
            for (std::size_t j = 0; j < n; ++j) {
                double l = j > 0 ? u0.values[j - 1] : 0.0;
                double r = j + 1 < n ? u0.values[j + 1] : 0.0;
                tmp[j] = 0.25 * l + 0.5 * u0.values[j] + 0.25 * r;
            }
            u0.values.swap(tmp);
        }
        auto res = normalized_gradient_flow(grid, V, a, b, beta_star, dim, u0, cfg);
        if (!res.converged) pr.conclusive = false;
        pr.runs.push_back(std::move(res));
    }
    Scheme sc(grid);
    for (std::size_t i = 0; i < pr.runs.size(); ++i) {
        for (std::size_t j = i + 1; j < pr.runs.size(); ++j) {
            std::vector<double> diff(n);
            for (std::size_t k = 0; k < n; ++k)
                diff[k] = pr.runs[i].u.values[k] - pr.runs[j].u.values[k];
            double d = std::sqrt(sc.mass(sc.to_state(diff)));
            pr.max_pairwise_l2 = std::max(pr.max_pairwise_l2, d);
        }
    }
    if (pr.max_pairwise_l2 > 1e-3) pr.twin_suspected = true;
    return pr;
}

}  // namespace kgs
