#pragma once

#include <cmath>
#include <string>

#include "lmpot/errors.hpp"
#include "lmpot/lmoments.hpp"
#include "lmpot/sample.hpp"

namespace lmpot {

// Shape/scale switch below which the exponential limit branch is used.
inline constexpr double shape_limit_tol = 1e-9;

struct GpdParams {
    double sigma = 1.0; // scale, > 0
    double xi = 0.0;    // shape
};

// Method-of-L-moments fit plus the validity flag for downstream asymptotics,
// which require xi in (-1/2, 1/2).
struct GpdFit {
    GpdParams params;
    bool asymptotics_valid = true;
};

struct PopulationLmoments {
    double l1 = 0, l2 = 0;
    double t3 = 0, t4 = 0;
};

inline void check_gpd(const GpdParams& p) {
    if (!(p.sigma > 0))
        throw domain_error("GPd scale must be positive");
}

// Distribution function of the excess distribution, x >= 0.
inline double gpd_cdf(double x, const GpdParams& p) {
    check_gpd(p);
    if (!(x > 0))
        return 0.0;
    double v;
    if (std::fabs(p.xi) < shape_limit_tol) {
        v = -std::expm1(-x / p.sigma);
    } else {
        const double w = 1 + p.xi * x / p.sigma;
        if (w <= 0)
            return p.xi < 0 ? 1.0 : 0.0; // beyond the finite endpoint
        v = -std::expm1(-std::log1p(p.xi * x / p.sigma) / p.xi);
    }
    if (v < 0) return 0.0;
    if (v > 1) return 1.0;
    return v;
}

inline double gpd_quantile(double prob, const GpdParams& p) {
    check_gpd(p);
    if (!(prob >= 0 && prob < 1))
        throw domain_error("gpd_quantile requires 0 <= p < 1");
    if (std::fabs(p.xi) < shape_limit_tol)
        return -p.sigma * std::log1p(-prob);
    return p.sigma / p.xi * std::expm1(-p.xi * std::log1p(-prob));
}

// PWM estimators: xi = 2 - a0/(a0 - 2 a1), sigma = 2 a0 a1/(a0 - 2 a1).
inline GpdFit gpd_fit_pwm(const ObservationSample& excesses) {
    const PwmSet a = pwm_estimates(excesses, 1);
    const double denom = a.a[0] - 2 * a.a[1]; // equals the sample L-scale
    if (!(denom > degenerate_l2_rel_tol * std::fabs(a.a[0])))
        throw degenerate_sample_error("gpd_fit_pwm: degenerate sample, a0 - 2 a1 is zero");

    GpdFit fit;
    fit.params.xi = 2 - a.a[0] / denom;
    fit.params.sigma = 2 * a.a[0] * a.a[1] / denom;
    fit.asymptotics_valid = fit.params.xi > -0.5 && fit.params.xi < 0.5;
    if (!(fit.params.sigma > 0))
        throw degenerate_sample_error("gpd_fit_pwm: non-positive fitted scale");
    return fit;
}

// First two L-moments and both ratio coordinates; defined for xi < 1.
inline PopulationLmoments gpd_population_lmoments(const GpdParams& p) {
    check_gpd(p);
    if (!(p.xi < 1))
        throw nonexistent_moment_error("GPd L-moments need xi < 1");
    PopulationLmoments out;
    out.l1 = p.sigma / (1 - p.xi);
    out.l2 = p.sigma / ((1 - p.xi) * (2 - p.xi));
    out.t3 = (1 + p.xi) / (3 - p.xi);
    out.t4 = gpd_g(out.t3);
    return out;
}

} // namespace lmpot
