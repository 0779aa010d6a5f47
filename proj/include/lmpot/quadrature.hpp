#pragma once

#include <array>
#include <cmath>

#include "lmpot/errors.hpp"

namespace lmpot {
namespace detail {

struct QuadLmoments {
    std::array<double, 4> lam{};
};

// First four L-moments of a distribution given by its quantile function,
//   lambda_{r+1} = integral_0^1 x(F) P*_r(F) dF,
// with P*_r the shifted Legendre polynomials. Uses tanh-sinh quadrature,
// which keeps spectral accuracy for the endpoint singularities produced by
// heavy tails; node levels halve the step until the estimates settle.
//
// The integrand callback receives both F and log F; quantile evaluation near
// F -> 1^- must use log F to avoid losing the tail.
template <class QuantileFn>
QuadLmoments de_lmoment_quadrature(QuantileFn&& quantile) {
    constexpr double t_max = 6.0;
    constexpr double base_step = 0.5;
    constexpr int max_level = 8;
    constexpr double rel_tol = 1e-11;
    constexpr double half_pi = 1.5707963267948966;

    std::array<double, 4> raw{}; // step-independent node sums
    std::array<double, 4> prev{};

    auto add_node = [&](double t) {
        const double u = half_pi * std::sinh(t);
        const double cu = std::cosh(u);
        const double w = 0.5 * half_pi * std::cosh(t) / (cu * cu);
        if (!(w > 0))
            return; // weight underflowed; tail already exhausted
        double f, log_f;
        if (u >= 0) {
            const double em = std::exp(-2 * u);
            f = 1 / (1 + em);
            log_f = -std::log1p(em);
        } else {
            const double ep = std::exp(2 * u);
            f = ep / (1 + ep);
            log_f = 2 * u - std::log1p(ep);
        }
        const double x = quantile(f, log_f);
        if (!std::isfinite(x))
            throw nonexistent_moment_error("quantile not integrable at interior node");
        const double p1 = 2 * f - 1;
        const double p2 = (6 * f - 6) * f + 1;
        const double p3 = ((20 * f - 30) * f + 12) * f - 1;
        raw[0] += x * w;
        raw[1] += x * p1 * w;
        raw[2] += x * p2 * w;
        raw[3] += x * p3 * w;
    };

    QuadLmoments out;
    for (int level = 0; level <= max_level; ++level) {
        const double step = base_step / static_cast<double>(1 << level);
        if (level == 0) {
            const int k_max = static_cast<int>(t_max / step);
            for (int k = -k_max; k <= k_max; ++k)
                add_node(k * step);
        } else {
            // only the nodes new to this level: odd multiples of step
            const int k_max = static_cast<int>(t_max / step);
            for (int k = 1; k <= k_max; k += 2) {
                add_node(k * step);
                add_node(-k * step);
            }
        }
        double scale = 1.0;
        double diff = 0.0;
        for (int r = 0; r < 4; ++r) {
            out.lam[r] = raw[r] * step;
            scale = std::max(scale, std::fabs(out.lam[r]));
            diff = std::max(diff, std::fabs(out.lam[r] - prev[r]));
        }
        if (level >= 1 && diff <= rel_tol * scale)
            break;
        prev = out.lam;
    }
    for (double v : out.lam) {
        if (!std::isfinite(v))
            throw nonexistent_moment_error("L-moment integral diverged");
    }
    return out;
}

} // namespace detail
} // namespace lmpot
