#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lmpot/errors.hpp"
#include "lmpot/gpd.hpp"
#include "lmpot/lmoments.hpp"
#include "lmpot/quadrature.hpp"
#include "lmpot/random.hpp"
#include "lmpot/sample.hpp"

namespace lmpot {

// Four-parameter Kappa family,
//   F(x) = [1 - h (1 + xi z)^(-1/xi)]^(1/h),  z = (x - mu) / sigma,
// with the h -> 0 (GEV) and xi -> 0 limits taken continuously. h = 1 with
// mu = 0 is the GPd; h = -1 is the generalized logistic; h = 0, xi = 0 is
// Gumbel.
struct KappaParams {
    double mu;
    double sigma;
    double xi;
    double h;
};

inline void check_kappa(const KappaParams& p) {
    if (!(std::isfinite(p.mu) && std::isfinite(p.sigma) && std::isfinite(p.xi) &&
          std::isfinite(p.h)))
        throw domain_error("kappa parameters must be finite");
    if (!(p.sigma > 0))
        throw domain_error("kappa scale must be positive");
}

namespace detail {

// log of t(F) = (1 - F^h)/h, the inner GEV-like reduced variate, given log F.
// For h < 0 and F -> 0, F^h overflows; h*logF > 30 already makes
// (1 - e^s)/h = e^s/|h| to full precision, so switch to the log form there.
inline double kappa_log_t(double log_f, double h) {
    if (std::fabs(h) < shape_limit_tol)
        return std::log(-log_f);
    const double s = h * log_f;
    if (s > 30.0)
        return s - std::log(std::fabs(h));
    return std::log(-std::expm1(s) / h);
}

inline double kappa_quantile_from_log(double log_f, const KappaParams& p) {
    const double log_t = kappa_log_t(log_f, p.h);
    if (std::fabs(p.xi) < shape_limit_tol)
        return p.mu - p.sigma * log_t;
    return p.mu + p.sigma / p.xi * std::expm1(-p.xi * log_t);
}

} // namespace detail

inline double kappa_quantile(double f, const KappaParams& params) {
    check_kappa(params);
    if (!(f > 0 && f < 1))
        throw domain_error("kappa_quantile requires 0 < F < 1");
    return detail::kappa_quantile_from_log(std::log(f), params);
}

inline double kappa_cdf(double x, const KappaParams& params) {
    check_kappa(params);
    const double z = (x - params.mu) / params.sigma;
    double t;
    if (std::fabs(params.xi) < shape_limit_tol) {
        t = std::exp(-z);
    } else {
        const double w = 1 + params.xi * z;
        if (!(w > 0))
            return params.xi > 0 ? 0.0 : 1.0;
        t = std::exp(-std::log1p(params.xi * z) / params.xi);
    }
    double f;
    if (std::fabs(params.h) < shape_limit_tol) {
        f = std::exp(-t);
    } else {
        const double v = 1 - params.h * t; // > 0 whenever h < 0 and t finite
        if (!(v > 0))
            f = params.h > 0 ? 0.0 : 1.0;
        else
            f = std::exp(std::log1p(-params.h * t) / params.h);
    }
    return std::min(1.0, std::max(0.0, f));
}

namespace detail {

struct KappaStdLmoments {
    double l1, l2, t3, t4;
};

// First four L-moments of Kappa(0, 1, xi, h) by quadrature of the quantile
// function. Caller guarantees the existence region.
inline KappaStdLmoments kappa_lmoments_std(double xi, double h) {
    const KappaParams std_params{0.0, 1.0, xi, h};
    const QuadLmoments q = de_lmoment_quadrature(
        [&](double /*f*/, double log_f) { return kappa_quantile_from_log(log_f, std_params); });
    const double l2 = q.lam[1];
    if (!(l2 > 0))
        throw nonexistent_moment_error("kappa L-scale not positive");
    return {q.lam[0], l2, q.lam[2] / l2, q.lam[3] / l2};
}

inline void check_kappa_lmoment_region(double xi, double h) {
    if (xi >= 1)
        throw nonexistent_moment_error("kappa mean requires xi < 1");
    if (h < -1)
        throw nonexistent_moment_error("kappa L-moments restricted to h >= -1");
    if (h < 0 && xi * h >= 1)
        throw nonexistent_moment_error("kappa lower tail too heavy (xi*h >= 1)");
}

} // namespace detail

inline PopulationLmoments kappa_lmoments(const KappaParams& params) {
    check_kappa(params);
    detail::check_kappa_lmoment_region(params.xi, params.h);
    const detail::KappaStdLmoments s = detail::kappa_lmoments_std(params.xi, params.h);
    return {params.mu + params.sigma * s.l1, params.sigma * s.l2, s.t3, s.t4};
}

namespace detail {

struct KappaFitBox {
    static constexpr double xi_lo = -20.0;
    static constexpr double xi_hi = 0.99;
    static constexpr double h_lo = -1.0 + 1e-9;
    static constexpr double h_hi = 1e4;
    static constexpr double cross_hi = 0.99; // cap on xi*h

    static void clamp(double& xi, double& h) {
        xi = std::min(xi_hi, std::max(xi_lo, xi));
        h = std::min(h_hi, std::max(h_lo, h));
        if (xi > 0)
            h = std::min(h, cross_hi / xi);
        else if (xi < 0)
            h = std::max(h, cross_hi / xi);
    }
};

struct KappaRoot {
    double xi = 0, h = 0;
    bool ok = false;
};

// Damped 2-D Newton on (xi, h) matching (tau3, tau4), forward-difference
// Jacobian, sup-norm residual.
inline KappaRoot kappa_newton(double t3, double t4, double xi0, double h0) {
    constexpr int max_iter = 100;
    constexpr int max_halvings = 45;
    constexpr double res_tol = 1e-10;

    auto residual = [&](double xi, double h, double& r3, double& r4) {
        const KappaStdLmoments s = kappa_lmoments_std(xi, h);
        r3 = s.t3 - t3;
        r4 = s.t4 - t4;
    };

    double xi = xi0, h = h0;
    KappaFitBox::clamp(xi, h);
    double r3, r4;
    residual(xi, h, r3, r4);
    double norm = std::max(std::fabs(r3), std::fabs(r4));

    for (int it = 0; it < max_iter; ++it) {
        if (norm <= res_tol)
            return {xi, h, true};
        const double dxi = 1e-6 * std::max(1.0, std::fabs(xi));
        const double dh = 1e-6 * std::max(1.0, std::fabs(h));
        double a3, a4, b3, b4;
        residual(xi + dxi, h, a3, a4);
        residual(xi, h + dh, b3, b4);
        const double j11 = (a3 - r3) / dxi, j12 = (b3 - r3) / dh;
        const double j21 = (a4 - r4) / dxi, j22 = (b4 - r4) / dh;
        const double det = j11 * j22 - j12 * j21;
        if (!std::isfinite(det) || std::fabs(det) < 1e-300)
            return {};
        const double step_xi = -(j22 * r3 - j12 * r4) / det;
        const double step_h = -(-j21 * r3 + j11 * r4) / det;

        double alpha = 1.0;
        bool improved = false;
        for (int half = 0; half <= max_halvings; ++half) {
            double trial_xi = xi + alpha * step_xi;
            double trial_h = h + alpha * step_h;
            KappaFitBox::clamp(trial_xi, trial_h);
            double s3, s4;
            residual(trial_xi, trial_h, s3, s4);
            const double trial_norm = std::max(std::fabs(s3), std::fabs(s4));
            if (trial_norm < norm) {
                xi = trial_xi;
                h = trial_h;
                r3 = s3;
                r4 = s4;
                norm = trial_norm;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!improved)
            return {};
    }
    return {};
}

} // namespace detail

// Method-of-L-moments Kappa fit. The (tau3, tau4) map is 2-to-1 in a narrow
// fold near (xi > 0.3, h in (-1, -0.6)); when a root lands there, nearby
// restarts probe for the companion root and the smaller-h one is returned, so
// the fit is a deterministic function of its inputs.
inline KappaParams kappa_fit_lmom(double l1, double l2, double t3, double t4) {
    if (!(std::isfinite(l1) && std::isfinite(l2) && std::isfinite(t3) && std::isfinite(t4)))
        throw domain_error("kappa_fit_lmom requires finite L-moments");
    if (!(l2 > 0))
        throw domain_error("kappa_fit_lmom requires l2 > 0");
    if (!(std::fabs(t3) < 1) || !(t4 < 1))
        throw infeasible_fit_error("L-moment ratios outside (-1,1)");
    if (!(t4 > lmrd_lower_bound(t3)))
        throw infeasible_fit_error("(t3,t4) below the attainable L-moment region");
    // h = -1 boundary: tau4 = (1 + 5 tau3^2)/6. The fold bulges at most
    // ~0.004 above it, so allow a small excess and let Newton reject the rest.
    constexpr double glo_margin = 0.01;
    if (!(t4 < (1 + 5 * t3 * t3) / 6 + glo_margin))
        throw infeasible_fit_error("(t3,t4) above the h = -1 boundary");

    double xi0 = (3 * t3 - 1) / (1 + t3); // GPd curve inverse
    xi0 = std::min(0.9, std::max(-5.0, xi0));
    const std::array<std::pair<double, double>, 7> starts{{
        {xi0, 1.0},
        {xi0, 0.25},
        {xi0, 3.0},
        {xi0, -0.5},
        {xi0, 20.0},
        {0.5, 1.0},
        {-0.5, 1.0},
    }};

    detail::KappaRoot root;
    for (const auto& s : starts) {
        root = detail::kappa_newton(t3, t4, s.first, s.second);
        if (root.ok)
            break;
    }
    if (!root.ok)
        throw convergence_error("kappa_fit_lmom did not converge");

    if (root.xi > 0.25 && root.h > -1 && root.h < -0.5) {
        // Fold zone: pick the smaller-h companion root when one exists.
        for (double delta : {-0.3, -0.15, 0.15, 0.3}) {
            const detail::KappaRoot alt = detail::kappa_newton(t3, t4, root.xi, root.h + delta);
            if (alt.ok && alt.h < root.h - 1e-6)
                root = alt;
        }
    }

    const detail::KappaStdLmoments s = detail::kappa_lmoments_std(root.xi, root.h);
    const double sigma = l2 / s.l2;
    const double mu = l1 - sigma * s.l1;
    if (!(sigma > 0) || !std::isfinite(sigma) || !std::isfinite(mu))
        throw convergence_error("kappa_fit_lmom produced a degenerate scale");
    return {mu, sigma, root.xi, root.h};
}

inline ObservationSample kappa_sample(const KappaParams& params, std::size_t n,
                                      RandomStream& stream) {
    check_kappa(params);
    if (n == 0)
        throw insufficient_sample_error("kappa_sample requires n >= 1");
    std::vector<double> x;
    x.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        x.push_back(detail::kappa_quantile_from_log(std::log(stream.uniform01()), params));
    return ObservationSample::from_unsorted(std::move(x));
}

} // namespace lmpot
