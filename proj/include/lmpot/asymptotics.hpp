#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "lmpot/errors.hpp"
#include "lmpot/gpd.hpp"
#include "lmpot/lmoments.hpp"
#include "lmpot/normal.hpp"

namespace lmpot {

using Mat4 = std::array<std::array<double, 4>, 4>;

// lim n Var(a0..a3) under the GPd. Valid only for |xi| < 1/2; below -1/2 the
// entries still evaluate, so they are computed and flagged rather than
// rejected (selection then carries a warning instead of silently changing).
struct PwmCovMatrix {
    Mat4 a{};
    bool asymptotics_valid = true;
};

struct LmomCovMatrix {
    Mat4 lam{};
    bool asymptotics_valid = true;
};

// lim n Var/Cov of (t3, t4).
struct RatioCov {
    double t33 = 0, t34 = 0, t44 = 0;
    double rho34_sq = 0;
    bool degenerate_correlation = false;
    bool asymptotics_valid = true;
};

struct ConfidenceBand {
    double center = 0;
    double lower = 0;
    double upper = 0;
    double level = 0;
};

inline PwmCovMatrix pwm_acov(const GpdParams& params) {
    check_gpd(params);
    const double xi = params.xi;
    if (xi >= 0.5)
        throw nonexistent_variance_error("PWM asymptotic variance requires xi < 1/2");
    PwmCovMatrix out;
    out.asymptotics_valid = xi > -0.5;
    const double s2 = params.sigma * params.sigma;
    for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s)
            out.a[r][s] = s2 / ((r + 1 - xi) * (s + 1 - xi) * (r + s + 1 - 2 * xi));
    return out;
}

namespace detail {

// Coefficients of lambda_{r+1} in terms of a0..a3.
inline constexpr Mat4 lmoment_pwm_map{{
    {1, 0, 0, 0},
    {1, -2, 0, 0},
    {1, -6, 6, 0},
    {1, -12, 30, -20},
}};

} // namespace detail

inline LmomCovMatrix lmom_acov(const PwmCovMatrix& pwm) {
    const Mat4& m = detail::lmoment_pwm_map;
    LmomCovMatrix out;
    out.asymptotics_valid = pwm.asymptotics_valid;
    for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) {
            double acc = 0;
            for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 4; ++s)
                    acc += m[i][r] * pwm.a[r][s] * m[j][s];
            out.lam[i][j] = acc;
            out.lam[j][i] = acc;
        }
    }
    return out;
}

inline RatioCov ratio_acov(const LmomCovMatrix& lcov, double l2, double t3, double t4) {
    if (!(l2 > 0))
        throw domain_error("ratio_acov requires l2 > 0");
    const Mat4& lam = lcov.lam;
    const double l2sq = l2 * l2;
    RatioCov out;
    out.asymptotics_valid = lcov.asymptotics_valid;
    out.t33 = (lam[2][2] - 2 * t3 * lam[1][2] + t3 * t3 * lam[1][1]) / l2sq;
    out.t34 =
        (lam[2][3] - t3 * lam[1][3] - t4 * lam[1][2] + t3 * t4 * lam[1][1]) / l2sq;
    out.t44 = (lam[3][3] - 2 * t4 * lam[1][3] + t4 * t4 * lam[1][1]) / l2sq;
    if (out.t33 > 0 && out.t44 > 0) {
        out.rho34_sq = out.t34 * out.t34 / (out.t33 * out.t44);
    } else {
        out.rho34_sq = 0;
        out.degenerate_correlation = true;
    }
    return out;
}

namespace detail {

inline double band_half_width(double t_marginal, const RatioCov& rc, std::size_t n_u,
                              double alpha) {
    if (n_u < 4)
        throw insufficient_sample_error("confidence band requires n_u >= 4");
    if (!(alpha > 0 && alpha < 1))
        throw domain_error("confidence level requires 0 < alpha < 1");
    const double z = std_normal_quantile(1 - alpha / 2);
    const double var = std::max(0.0, t_marginal * (1 - rc.rho34_sq));
    return z * std::sqrt(var / static_cast<double>(n_u));
}

} // namespace detail

// Conditional band for tau4 at abscissa t3_obs, centered on the GPd curve.
// rc must be the plug-in chain evaluated at tau3 = t3_obs, tau4 = g(t3_obs).
inline ConfidenceBand ci_tau4_given_t3(double t3_obs, std::size_t n_u, double alpha,
                                       const RatioCov& rc) {
    const double center = gpd_g(t3_obs);
    const double hw = detail::band_half_width(rc.t44, rc, n_u, alpha);
    return {center, center - hw, center + hw, 1 - alpha};
}

// Conditional band for tau3 at ordinate t4_obs; requires t4_obs > 0 so the
// curve inverse exists (g_inv throws otherwise).
inline ConfidenceBand ci_tau3_given_t4(double t4_obs, std::size_t n_u, double alpha,
                                       const RatioCov& rc) {
    const double center = gpd_g_inv(t4_obs);
    const double hw = detail::band_half_width(rc.t33, rc, n_u, alpha);
    return {center, center - hw, center + hw, 1 - alpha};
}

} // namespace lmpot
