#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgs/numerics.hpp"
#include "kgs/ode.hpp"

namespace kgs {

struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ProfileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ground state of  -2(Q'' + (N-1)/r Q') + ((4-N)/N) Q = Q^(8/N+1)  on a radial
// grid, with the far field continued analytically as C r^(-(N-1)/2) e^(-mu r).
struct RadialProfile {
    int dimension = 0;
    std::vector<double> radii;       // ascending, ends at truncation_radius
    std::vector<double> values;      // Q
    std::vector<double> derivative;  // Q'
    double decay_rate = 0.0;         // fitted mu
    double tail_coeff = 0.0;         // fitted C
    double truncation_radius = 0.0;  // numeric grid ends here, tail beyond
    double mass_sq = 0.0;            // |Q|_2^2 over R^N
    double peak_value = 0.0;         // Q(0)

    // Quintic Hermite using (Q, Q', Q'') at the solver nodes; Q'' comes from
    // the ODE itself, so interpolation error is h^6-level on adaptive steps.
    double operator()(double r) const {
        if (r > truncation_radius) return tail(r);
        if (r <= 0.0) return values.front();
        const auto& d2 = second_deriv_cache();
        auto it = std::upper_bound(radii.begin(), radii.end(), r);
        std::size_t j = std::size_t(it - radii.begin()) - 1;
        if (j + 1 >= radii.size()) return values.back();
        double hx = radii[j + 1] - radii[j];
        double t = (r - radii[j]) / hx;
        double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
        double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
        double H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
        double H2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        double G0 = 10 * t3 - 15 * t4 + 6 * t5;
        double G1 = -4 * t3 + 7 * t4 - 3 * t5;
        double G2 = 0.5 * t3 - t4 + 0.5 * t5;
        return H0 * values[j] + hx * H1 * derivative[j] + hx * hx * H2 * d2[j] +
               G0 * values[j + 1] + hx * G1 * derivative[j + 1] + hx * hx * G2 * d2[j + 1];
    }
    double tail(double r) const {
        return tail_coeff * std::pow(r, -0.5 * (dimension - 1)) * std::exp(-decay_rate * r);
    }
    double deriv(double r) const {
        if (r <= truncation_radius)
            return hermite_interp(radii, derivative, second_deriv_cache(), r);
        return -(decay_rate + 0.5 * (dimension - 1) / r) * tail(r);
    }

    // Q'' from the ODE itself, cached for Hermite interpolation.
    const std::vector<double>& second_deriv_cache() const {
        if (d2_.empty()) {
            d2_.resize(radii.size());
            double kap = (4.0 - dimension) / dimension;
            double q = 8.0 / dimension + 1.0;
            for (std::size_t i = 0; i < radii.size(); ++i) {
                double r = radii[i];
                if (r == 0.0) {
                    // limit at the origin: (1 + (N-1)) Q'' = (kap Q - Q^q)/2
                    d2_[i] = 0.5 * (kap * values[i] - std::pow(values[i], q)) / dimension;
                } else {
                    d2_[i] = -(dimension - 1) / r * derivative[i] +
                             0.5 * (kap * values[i] - std::pow(values[i], q));
                }
            }
        }
        return d2_;
    }

  private:
    mutable std::vector<double> d2_;
};

// Closed form for N=1:  Q(x) = 15^(1/8) sech^(1/4)(2 sqrt(6) x).
inline double closed_form_1d(double x) {
    double t = 2.0 * std::sqrt(6.0) * std::abs(x);
    double e = std::exp(-t);
    double sech = 2.0 * e / (1.0 + e * e);
    return std::pow(15.0, 0.125) * std::pow(sech, 0.25);
}

struct ShootingConfig {
    double q0_min = 0.1;          // amplitude search bracket
    double q0_max = 10.0;
    double bisect_width = 1e-13;  // absolute bracket width at exit
    double ode_rtol = 1e-12;
    double ode_atol = 1e-16;
    double r_switch_value = 3e-5;  // hand over to the analytic tail once Q drops below this
    double r_cap = 80.0;
    std::size_t quad_samples = 32768;  // uniform resampling for Simpson
};

namespace detail {

enum class ShotOutcome { decayed, crossed, turned };

struct ShotResult {
    ShotOutcome outcome;
    OdeTrace trace;
};

// classify_only: keep integrating past the tail-switch threshold so that a
// near-critical trajectory resolves into crossed or turned; stopping at the
// threshold would classify a whole amplitude band as "decayed" and bias the
// bisection by that band's width.
inline ShotResult shoot_once(int N, double q0, const ShootingConfig& cfg, bool classify_only) {
    const double kap = (4.0 - N) / double(N);
    const double q = 8.0 / N + 1.0;
    const double r0 = 1e-4;
    // Series start: Q = Q0 + c2 r^2 with c2 from the ODE, avoids the 1/r term.
    const double c2 = (kap * q0 - std::pow(q0, q)) / (4.0 * N);
    std::array<double, 2> y0 = {q0 + c2 * r0 * r0, 2.0 * c2 * r0};

    auto rhs = [&](double r, const std::array<double, 2>& y) -> std::array<double, 2> {
        double Q = y[0], dQ = y[1];
        double mag = std::abs(Q);
        double nl = std::pow(mag, q - 1.0) * Q;
        return {dQ, -(N - 1) / r * dQ + 0.5 * (kap * Q - nl)};
    };

    ShotOutcome outcome = ShotOutcome::decayed;
    auto stop = [&](double, const std::array<double, 2>& y) {
        if (y[0] <= 0.0) {
            outcome = ShotOutcome::crossed;
            return true;
        }
        if (y[1] > 0.0) {
            outcome = ShotOutcome::turned;
            return true;
        }
        if (!classify_only && y[0] < cfg.r_switch_value) return true;
        return false;
    };

    OdeOptions opt;
    opt.rtol = cfg.ode_rtol;
    opt.atol = cfg.ode_atol;
    opt.h_init = 1e-4;
    auto tr = integrate_dopri(rhs, r0, y0, cfg.r_cap, opt, stop);
    return {outcome, std::move(tr)};
}

}  // namespace detail

// Shooting solver. Bisects the initial amplitude between trajectories that
// turn back upward (amplitude too low) and trajectories that cross zero
// (too high); the exact ground state separates the two.
inline RadialProfile solve_ground_state(int N, const ShootingConfig& cfg = {}) {
    if (N < 1 || N > 3) throw std::invalid_argument("solve_ground_state: N must be 1, 2 or 3");

    double lo = cfg.q0_min, hi = cfg.q0_max;
    double q0;
    if (lo == hi) {
        q0 = lo;  // caller supplied the exact amplitude
    } else {
        auto lo_shot = detail::shoot_once(N, lo, cfg, true);
        auto hi_shot = detail::shoot_once(N, hi, cfg, true);
        if (lo_shot.outcome != detail::ShotOutcome::turned ||
            hi_shot.outcome != detail::ShotOutcome::crossed)
            throw BracketError("bracket failure: search range does not bracket the ground state");
        for (int it = 0; it < 300 && (hi - lo) > cfg.bisect_width; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            auto s = detail::shoot_once(N, mid, cfg, true);
            if (s.outcome == detail::ShotOutcome::crossed)
                hi = mid;
            else if (s.outcome == detail::ShotOutcome::turned)
                lo = mid;
            else
                break;  // ran to r_cap undecided: bracket exhausted machine resolution
        }
        q0 = 0.5 * (lo + hi);
    }

    auto final_shot = detail::shoot_once(N, q0, cfg, false);
    const auto& tr = final_shot.trace;

    // Keep the clean part: strictly positive and decreasing.
    std::size_t keep = tr.r.size();
    for (std::size_t i = 1; i < tr.r.size(); ++i) {
        if (tr.y[i][0] <= 0.0 || tr.y[i][1] > 0.0 || tr.y[i][0] < cfg.r_switch_value) {
            keep = (tr.y[i][0] >= cfg.r_switch_value) ? i + 1 : i;
            break;
        }
    }
    if (keep < 8) throw ProfileError("profile invalid: too few clean nodes");

    RadialProfile prof;
    prof.dimension = N;
    prof.peak_value = q0;
    prof.radii.assign(tr.r.begin(), tr.r.begin() + keep);
    prof.values.resize(keep);
    prof.derivative.resize(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        prof.values[i] = tr.y[i][0];
        prof.derivative[i] = tr.y[i][1];
    }
    // Prepend the exact origin point.
    prof.radii.insert(prof.radii.begin(), 0.0);
    prof.values.insert(prof.values.begin(), q0);
    prof.derivative.insert(prof.derivative.begin(), 0.0);
    prof.truncation_radius = prof.radii.back();

    for (std::size_t i = 1; i < prof.values.size(); ++i)
        if (prof.values[i] >= prof.values[i - 1] && prof.radii[i] > 1e-3)
            throw ProfileError("profile invalid: not strictly decreasing");

    // Fit ln(Q r^((N-1)/2)) = ln C - mu r over the window Q in [switch, 1e-3],
    // resampled uniformly so sparse adaptive steps cannot starve the fit.
    {
        double r_hi = prof.truncation_radius;
        double r_lo = r_hi;
        for (std::size_t i = 0; i < prof.radii.size(); ++i) {
            if (prof.values[i] <= 1e-3) {
                r_lo = prof.radii[i];
                break;
            }
        }
        if (!(r_hi > r_lo + 1e-6))
            throw ProfileError("profile invalid: tail window too short for decay fit");
        const std::size_t nfit = 200;
        std::vector<std::vector<double>> X;
        std::vector<double> y;
        for (std::size_t i = 0; i <= nfit; ++i) {
            double r = r_lo + (r_hi - r_lo) * double(i) / double(nfit);
            double Q = hermite_interp(prof.radii, prof.values, prof.derivative, r);
            if (!(Q > 0)) continue;
            X.push_back({1.0, r});
            y.push_back(std::log(Q) + 0.5 * (N - 1) * std::log(r));
        }
        auto beta = lstsq(X, y);
        prof.tail_coeff = std::exp(beta[0]);
        prof.decay_rate = -beta[1];
        if (prof.decay_rate <= 0) throw ProfileError("profile invalid: nonpositive decay rate");
    }

    // Cache |Q|_2^2.
    prof.mass_sq = 0.0;  // set below by weighted_moment, which needs mass_sq unset-safe
    return prof;
}

// integral over R^N of |x|^p Q^2, p >= 0: bulk Simpson on a uniform resample
// plus the analytic exponential tail.
inline double weighted_moment(const RadialProfile& prof, double p) {
    if (p < 0) throw std::invalid_argument("weighted_moment: p must be >= 0");
    const int N = prof.dimension;
    const double S = sphere_surface(N);
    const double R = prof.truncation_radius;
    std::size_t n = 32768;
    double h = R / double(n);
    std::vector<double> f(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        double r = double(i) * h;
        double Q = hermite_interp(prof.radii, prof.values, prof.derivative, r);
        f[i] = std::pow(r, p + N - 1) * Q * Q;
    }
    double bulk = simpson_uniform(f, h);
    // Tail: S C^2 int_R^inf r^p e^(-2 mu r) dr, integrand monotone decreasing here.
    double mu2 = 2.0 * prof.decay_rate;
    double C2 = prof.tail_coeff * prof.tail_coeff;
    double tail = simpson_fn(
        [&](double r) { return std::pow(r, p) * std::exp(-mu2 * (r - R)); }, R, R + 80.0 / mu2,
        20000);
    tail *= C2 * std::exp(-mu2 * R);
    return S * (bulk + tail);
}

inline double profile_mass_sq(const RadialProfile& prof) { return weighted_moment(prof, 0.0); }

// integral over R^N of |grad Q|^2 and of Q^(2+8/N), same bulk+tail scheme.
inline double profile_grad_sq(const RadialProfile& prof) {
    const int N = prof.dimension;
    const double S = sphere_surface(N);
    const double R = prof.truncation_radius;
    std::size_t n = 32768;
    double h = R / double(n);
    const auto& d2 = prof.second_deriv_cache();
    std::vector<double> f(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        double r = double(i) * h;
        double dQ = hermite_interp(prof.radii, prof.derivative, d2, r);
        f[i] = std::pow(r, N - 1) * dQ * dQ;
    }
    double bulk = simpson_uniform(f, h);
    double mu = prof.decay_rate;
    double C2 = prof.tail_coeff * prof.tail_coeff;
    double tail = simpson_fn(
        [&](double r) {
            double slope = mu + 0.5 * (N - 1) / r;
            return slope * slope * std::exp(-2.0 * mu * (r - R));
        },
        R, R + 40.0 / mu, 20000);
    tail *= C2 * std::exp(-2.0 * mu * R);
    return S * (bulk + tail);
}

inline double profile_interaction(const RadialProfile& prof) {
    const int N = prof.dimension;
    const double q = 2.0 + 8.0 / N;
    const double S = sphere_surface(N);
    const double R = prof.truncation_radius;
    std::size_t n = 32768;
    double h = R / double(n);
    std::vector<double> f(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        double r = double(i) * h;
        double Q = hermite_interp(prof.radii, prof.values, prof.derivative, r);
        f[i] = std::pow(r, N - 1) * std::pow(Q, q);
    }
    double bulk = simpson_uniform(f, h);
    double mu = prof.decay_rate;
    double Cq = std::pow(prof.tail_coeff, q);
    double tail = simpson_fn(
        [&](double r) {
            return std::pow(r, (N - 1) * (1.0 - 0.5 * q)) * std::exp(-q * mu * (r - R));
        },
        R, R + 40.0 / (q * mu) + 10.0, 20000);
    tail *= Cq * std::exp(-q * mu * R);
    return S * (bulk + tail);
}

// Fills mass_sq; call once after solve_ground_state.
inline void finalize_profile(RadialProfile& prof) { prof.mass_sq = profile_mass_sq(prof); }

inline RadialProfile ground_state(int N, const ShootingConfig& cfg = {}) {
    auto p = solve_ground_state(N, cfg);
    finalize_profile(p);
    return p;
}

struct SharpConstants {
    double gn_best = 0.0;          // (N+4)/(N |Q|_2^(8/N))
    double beta_star_unit = 0.0;   // |Q|_2^(8/N)/2, i.e. beta* at b=1
    double pohozaev_residual_grad = 0.0;  // (A - B)/B
    double pohozaev_residual_nl = 0.0;    // (B - N/(N+4) P)/B
    double gn_ratio_at_q = 0.0;    // P/(A^2 B^(4/N-1)), must equal gn_best
    std::optional<double> carlen_cprime;  // (8/7)(6/7)^3 |Q|_2^(-8), N=3 only
};

// Both scalar identities follow from the Pohozaev/Nehari pair for
// -2 Lap Q + ((4-N)/N) Q = Q^(8/N+1):
//   (i)  2A + ((4-N)/N) B = P      (multiply by Q)
//   (ii) (N-2) A + ((4-N)/2) B = N^2 P/(2N+8)   (multiply by x . grad Q)
// which combine to A = B and P = ((N+4)/N) B; at N=3 these are the paper's
// A = B = (3/7) P.
inline SharpConstants sharp_constants(const RadialProfile& prof) {
    const int N = prof.dimension;
    double B = prof.mass_sq > 0 ? prof.mass_sq : profile_mass_sq(prof);
    double A = profile_grad_sq(prof);
    double P = profile_interaction(prof);
    SharpConstants sc;
    double B4N = std::pow(B, 4.0 / N);  // |Q|_2^(8/N)
    sc.gn_best = (N + 4.0) / (N * B4N);
    sc.beta_star_unit = 0.5 * B4N;
    sc.pohozaev_residual_grad = (A - B) / B;
    sc.pohozaev_residual_nl = (B - (double(N) / (N + 4.0)) * P) / B;
    sc.gn_ratio_at_q = P / (A * A * std::pow(B, 4.0 / N - 1.0));
    if (N == 3) sc.carlen_cprime = (8.0 / 7.0) * std::pow(6.0 / 7.0, 3) / (B * B * B * B);
    return sc;
}

}  // namespace kgs
