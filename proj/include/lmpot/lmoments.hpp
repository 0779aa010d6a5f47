#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "lmpot/errors.hpp"
#include "lmpot/sample.hpp"

namespace lmpot {

// Unbiased probability weighted moments a_0..a_rmax,
//   a_r = (1/n) * sum_i C(n-i, r) x_{i:n} / C(n-1, r).
struct PwmSet {
    double a[4] = {0, 0, 0, 0};
    int rmax = 0;
};

// First four sample L-moments and the ratio statistics t3 = l3/l2,
// t4 = l4/l2. For any non-degenerate sample |t3| < 1, t4 < 1 and
// t4 >= (5 t3^2 - 1)/4.
struct LStatSet {
    double l1 = 0, l2 = 0, l3 = 0, l4 = 0;
    double t3 = 0, t4 = 0;
    std::size_t n = 0;
};

inline PwmSet pwm_estimates(const ObservationSample& sample, int rmax) {
    const std::size_t n = sample.size();
    if (rmax < 0 || rmax > 3)
        throw domain_error("pwm_estimates supports 0 <= rmax <= 3");
    if (n <= static_cast<std::size_t>(rmax))
        throw insufficient_sample_error(
            "pwm_estimates needs n > rmax, got n = " + std::to_string(n));

    PwmSet out;
    out.rmax = rmax;
    for (int r = 0; r <= rmax; ++r) {
        // w_i = C(n-i, r)/C(n-1, r) by the ratio recurrence; no factorials,
        // exact for n in the thousands.
        double w = 1.0;
        double acc = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            acc += w * sample[i - 1];
            const double ni = static_cast<double>(n - i);
            w *= (ni - r) / ni; // final iteration multiplies a value never used
        }
        out.a[r] = acc / static_cast<double>(n);
    }
    return out;
}

// Noise floor under which l2 counts as zero and ratios are undefined.
inline constexpr double degenerate_l2_rel_tol = 1e-14;

inline LStatSet l_statistics(const ObservationSample& sample) {
    if (sample.size() < 4)
        throw insufficient_sample_error(
            "l_statistics needs n >= 4, got n = " + std::to_string(sample.size()));
    const PwmSet p = pwm_estimates(sample, 3);

    LStatSet s;
    s.n = sample.size();
    s.l1 = p.a[0];
    s.l2 = p.a[0] - 2 * p.a[1];
    s.l3 = p.a[0] - 6 * p.a[1] + 6 * p.a[2];
    s.l4 = p.a[0] - 12 * p.a[1] + 30 * p.a[2] - 20 * p.a[3];
    if (!(s.l2 > degenerate_l2_rel_tol * std::fabs(s.l1)))
        throw degenerate_sample_error("sample L-scale is zero; ratios undefined");
    s.t3 = s.l3 / s.l2;
    s.t4 = s.l4 / s.l2;
    return s;
}

// L-kurtosis of a generalized Pareto distribution as a function of its
// L-skewness. Strictly increasing on [0,1] with g(1/3) = 1/6.
inline double gpd_g(double t3) {
    return t3 * (1 + 5 * t3) / (5 + t3);
}

// Analytic inverse of gpd_g, restricted to the first quadrant of the
// ratio diagram (t3, t4 > 0).
inline double gpd_g_inv(double t4) {
    if (!(t4 > 0))
        throw domain_error("gpd_g_inv requires t4 > 0");
    return (t4 - 1) / 10 + std::sqrt(t4 * t4 + 98 * t4 + 1) / 10;
}

// Lower bound of the attainable (t3, t4) region for any distribution.
inline double lmrd_lower_bound(double t3) {
    return (5 * t3 * t3 - 1) / 4;
}

} // namespace lmpot
