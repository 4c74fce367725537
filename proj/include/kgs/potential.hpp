#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "kgs/domain.hpp"
#include "kgs/radial_profile.hpp"

namespace kgs {

struct Well {
    double location = 0.0;  // 1-D coordinate; radial mode requires 0 (center)
    double exponent = 0.0;  // p_i > 0
};

// Multi-well trapping potential V(x) = prod_i |x - x_i|^(p_i), modulation
// h(x) fixed to 1 (documented extension point).
struct PotentialSpec {
    std::vector<Well> wells;

    void validate(const DomainSpec& dom) const {
        if (wells.empty()) throw ConfigError("potential requires at least one well");
        for (const auto& w : wells) {
            if (!(w.exponent > 0)) throw ConfigError("well exponent must be positive");
            if (dom.kind == DomainKind::interval) {
                if (w.location < dom.x_lo || w.location > dom.x_hi)
                    throw ConfigError("well location outside the domain closure");
            } else {
                if (w.location != 0.0)
                    throw ConfigError("radial mode supports a single centered well only");
            }
        }
        if (dom.kind == DomainKind::ball && wells.size() != 1)
            throw ConfigError("radial mode supports a single centered well only");
    }

    double operator()(double x) const {
        double v = 1.0;
        for (const auto& w : wells) v *= std::pow(std::abs(x - w.location), w.exponent);
        return v;
    }
};

inline GridFunction evaluate_potential(const PotentialSpec& pot,
                                       std::shared_ptr<const Grid> grid) {
    if (pot.wells.empty()) throw ConfigError("potential requires at least one well");
    return GridFunction::sample(std::move(grid), [&](double x) { return pot(x); });
}

struct WellClassification {
    double p = 0.0;                  // max exponent
    std::vector<double> kappa_i;     // finite only where p_i == p
    std::vector<bool> kappa_finite;  // explicit flag instead of serialized inf
    std::vector<double> lambda_i;    // NaN outside Z1
    double kappa = 0.0;              // min of the finite kappa_i
    double lambda = std::numeric_limits<double>::quiet_NaN();  // min over Z1
    std::vector<std::size_t> z1;     // interior flattest wells
    std::vector<std::size_t> z0;     // boundary flattest wells
};

struct DegenerateConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flattest-well taxonomy: p = max p_i; kappa_i = lim V/|x-x_i|^p =
// prod_{j != i} |x_i - x_j|^(p_j) (h == 1); lambda_i from the p-weighted
// profile moment; Z1/Z0 split by strict interiority of the well location.
inline WellClassification classify_wells(const PotentialSpec& pot, const DomainSpec& dom,
                                         const RadialProfile& prof) {
    pot.validate(dom);
    if (prof.dimension != dom.dimension)
        throw ConfigError("profile dimension does not match the domain");
    WellClassification wc;
    const auto& ws = pot.wells;
    wc.p = 0.0;
    for (const auto& w : ws) wc.p = std::max(wc.p, w.exponent);

    auto interior = [&](double x) {
        if (dom.kind == DomainKind::interval) return x > dom.x_lo && x < dom.x_hi;
        return std::abs(x) < dom.radius;
    };

    double mass = prof.mass_sq > 0 ? prof.mass_sq : profile_mass_sq(prof);
    double moment_p = weighted_moment(prof, wc.p);

    wc.kappa_i.assign(ws.size(), std::numeric_limits<double>::infinity());
    wc.kappa_finite.assign(ws.size(), false);
    wc.lambda_i.assign(ws.size(), std::numeric_limits<double>::quiet_NaN());
    wc.kappa = std::numeric_limits<double>::infinity();

    for (std::size_t i = 0; i < ws.size(); ++i) {
        if (ws[i].exponent != wc.p) continue;  // kappa_i diverges, keep the sentinel
        double k = 1.0;
        for (std::size_t j = 0; j < ws.size(); ++j) {
            if (j == i) continue;
            k *= std::pow(std::abs(ws[i].location - ws[j].location), ws[j].exponent);
        }
        if (k == 0.0)
            throw DegenerateConfigError(
                "degenerate configuration: flattest well coincides with another well");
        wc.kappa_i[i] = k;
        wc.kappa_finite[i] = true;
        wc.kappa = std::min(wc.kappa, k);
        if (interior(ws[i].location)) {
            wc.z1.push_back(i);
            wc.lambda_i[i] =
                std::pow(wc.p * k / (2.0 * mass) * moment_p, 1.0 / (wc.p + 2.0));
            if (std::isnan(wc.lambda) || wc.lambda_i[i] < wc.lambda) wc.lambda = wc.lambda_i[i];
        } else {
            wc.z0.push_back(i);
        }
    }
    if (wc.z1.empty() && wc.z0.empty())
        throw ConfigError("no flattest well found");  // unreachable: max is attained
    return wc;
}

}  // namespace kgs
