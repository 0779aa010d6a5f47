#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lmpot/asymptotics.hpp"
#include "lmpot/errors.hpp"
#include "lmpot/gpd.hpp"
#include "lmpot/kappa.hpp"
#include "lmpot/lmoments.hpp"
#include "lmpot/normal.hpp"
#include "lmpot/random.hpp"
#include "lmpot/sample.hpp"

namespace lmpot {

// Candidate thresholds at equally spaced sample quantiles. The threshold for
// probability p is the order statistic x_{ceil(n p):n}; excesses are the
// observations strictly above it, shifted to excess scale.
struct CandidateGrid {
    std::vector<double> probabilities;
    std::vector<double> thresholds;
    std::vector<std::size_t> exceedance_counts;

    std::size_t size() const { return probabilities.size(); }
};

// Endpoint presets: I = 10 stops at the 92.5% quantile, everything else at
// 95%, both starting at 25%.
inline std::pair<double, double> default_grid_probabilities(std::size_t n_candidates) {
    if (n_candidates == 10)
        return {0.25, 0.925};
    return {0.25, 0.95};
}

inline CandidateGrid build_grid(const ObservationSample& sample, std::size_t n_candidates,
                                double p_start, double p_end) {
    if (n_candidates < 2)
        throw domain_error("candidate grid requires I >= 2");
    if (!(p_start > 0 && p_start < p_end && p_end < 1))
        throw domain_error("grid probabilities require 0 < p_start < p_end < 1");
    const auto& x = sample.values();
    const double n = static_cast<double>(x.size());

    CandidateGrid grid;
    grid.probabilities.reserve(n_candidates);
    grid.thresholds.reserve(n_candidates);
    grid.exceedance_counts.reserve(n_candidates);
    const double step = (p_end - p_start) / static_cast<double>(n_candidates - 1);
    for (std::size_t i = 0; i < n_candidates; ++i) {
        const double p = p_start + static_cast<double>(i) * step;
        auto rank = static_cast<std::size_t>(std::ceil(n * p));
        rank = std::min(x.size(), std::max<std::size_t>(1, rank));
        const double u = x[rank - 1];
        const auto n_u = static_cast<std::size_t>(
            x.end() - std::upper_bound(x.begin(), x.end(), u));
        if (n_u < 4)
            throw grid_error("fewer than 4 exceedances above candidate " +
                             std::to_string(i + 1));
        grid.probabilities.push_back(p);
        grid.thresholds.push_back(u);
        grid.exceedance_counts.push_back(n_u);
    }
    return grid;
}

inline ObservationSample excesses_above(const ObservationSample& sample, double u) {
    const auto& x = sample.values();
    const auto it = std::upper_bound(x.begin(), x.end(), u);
    std::vector<double> e;
    e.reserve(static_cast<std::size_t>(x.end() - it));
    for (auto p = it; p != x.end(); ++p)
        e.push_back(*p - u);
    return ObservationSample::from_sorted(std::move(e));
}

enum class SelectionMethod { alcbsm, algfsm };
enum class CandidateStatus { accepted, rejected, indeterminate };

struct CandidateDiagnostic {
    std::size_t index = 0; // position in the grid
    double u = 0;
    std::size_t n_u = 0;
    std::optional<double> t3, t4;
    std::optional<ConfidenceBand> band_tau4, band_tau3;
    std::optional<double> z, p, fs;
    CandidateStatus status = CandidateStatus::indeterminate;
    std::vector<std::string> warnings;
};

struct SelectionOutcome {
    SelectionMethod method = SelectionMethod::alcbsm;
    std::optional<std::size_t> selected_index;
    std::optional<double> u_star;
    std::optional<std::size_t> n_star;
    std::vector<CandidateDiagnostic> diagnostics;
};

// ALCBSM: accept the first candidate whose (t3, t4) lies inside both
// conditional bands on the L-moment ratio diagram. Every candidate is
// diagnosed even after a selection, so the trace shows levels where the
// membership tests break down again.
inline SelectionOutcome alcbsm_select(const ObservationSample& sample,
                                      const CandidateGrid& grid, double alpha) {
    if (!(alpha > 0 && alpha < 0.5))
        throw domain_error("alcbsm_select requires 0 < alpha < 0.5");
    SelectionOutcome out;
    out.method = SelectionMethod::alcbsm;
    out.diagnostics.reserve(grid.size());

    for (std::size_t i = 0; i < grid.size(); ++i) {
        CandidateDiagnostic diag;
        diag.index = i;
        diag.u = grid.thresholds[i];
        diag.n_u = grid.exceedance_counts[i];
        try {
            const ObservationSample exc = excesses_above(sample, diag.u);
            const LStatSet ls = l_statistics(exc);
            diag.t3 = ls.t3;
            diag.t4 = ls.t4;

            const GpdFit fit = gpd_fit_pwm(exc);
            if (!fit.asymptotics_valid)
                diag.warnings.push_back("shape estimate outside asymptotic range");
            const LmomCovMatrix lam = lmom_acov(pwm_acov(fit.params));

            // l2 of the PWM fit reproduces the sample L-scale exactly.
            const RatioCov rc4 = ratio_acov(lam, ls.l2, ls.t3, gpd_g(ls.t3));
            diag.band_tau4 = ci_tau4_given_t3(ls.t3, diag.n_u, alpha, rc4);
            const bool pass4 =
                diag.band_tau4->lower <= ls.t4 && ls.t4 <= diag.band_tau4->upper;

            const double tau3_plug = gpd_g_inv(ls.t4); // throws for t4 <= 0
            const RatioCov rc3 = ratio_acov(lam, ls.l2, tau3_plug, ls.t4);
            diag.band_tau3 = ci_tau3_given_t4(ls.t4, diag.n_u, alpha, rc3);
            const bool pass3 =
                diag.band_tau3->lower <= ls.t3 && ls.t3 <= diag.band_tau3->upper;

            if (rc4.degenerate_correlation || rc3.degenerate_correlation)
                diag.warnings.push_back("degenerate ratio correlation");
            diag.status =
                pass4 && pass3 ? CandidateStatus::accepted : CandidateStatus::rejected;
        } catch (const error& e) {
            diag.status = CandidateStatus::indeterminate;
            diag.warnings.push_back(e.what());
        }
        if (diag.status == CandidateStatus::accepted && !out.selected_index) {
            out.selected_index = i;
            out.u_star = grid.thresholds[i];
            out.n_star = grid.exceedance_counts[i];
        }
        out.diagnostics.push_back(std::move(diag));
    }
    return out;
}

struct GofZResult {
    double z = 0;
    KappaParams kappa{};
    double b4 = 0;
    double sigma4 = 0;
};

// Kappa-simulation goodness-of-fit measure for one excess sample: the
// distance from t4 to the GPd curve at abscissa t3, recentred by the
// simulated small-sample bias of t4 and scaled by its simulated spread.
inline GofZResult gof_z_statistic(const ObservationSample& excesses, std::size_t n_sims,
                                  RandomStream& stream) {
    if (n_sims < 100)
        throw domain_error("gof_z_statistic requires N >= 100");
    const LStatSet ls = l_statistics(excesses);
    const double tau4_gp = gpd_g(ls.t3);
    const KappaParams kappa = kappa_fit_lmom(ls.l1, ls.l2, ls.t3, ls.t4);

    double sum_d = 0, sum_d2 = 0;
    for (std::size_t m = 0; m < n_sims; ++m) {
        const ObservationSample sim = kappa_sample(kappa, excesses.size(), stream);
        const double d = l_statistics(sim).t4 - ls.t4;
        sum_d += d;
        sum_d2 += d * d;
    }
    const double n = static_cast<double>(n_sims);
    const double b4 = sum_d / n;
    const double var4 = (sum_d2 - n * b4 * b4) / (n - 1);
    const double sigma4 = std::sqrt(std::max(0.0, var4));
    if (!(sigma4 > 0))
        throw degenerate_sample_error("simulated t4 spread is zero");
    return {(tau4_gp - ls.t4 + b4) / sigma4, kappa, b4, sigma4};
}

inline double gof_pvalue(double z) {
    if (!std::isfinite(z))
        throw domain_error("gof_pvalue requires finite z");
    return 2 - 2 * std_normal_cdf(std::fabs(z));
}

struct ForwardStopResult {
    std::size_t k_hat = 0;
    std::vector<double> fs;
};

// ForwardStop over ordered p-values: fs_k is the running mean of
// -log(1 - p_i), and k_hat the largest k with fs_k <= alpha (0 if none).
// p = 1 maps to +inf, which can never be below alpha.
inline ForwardStopResult forward_stop(const std::vector<double>& pvalues, double alpha) {
    if (!(alpha > 0 && alpha < 1))
        throw domain_error("forward_stop requires 0 < alpha < 1");
    ForwardStopResult out;
    out.fs.reserve(pvalues.size());
    double acc = 0;
    for (std::size_t k = 0; k < pvalues.size(); ++k) {
        const double p = pvalues[k];
        if (!(p >= 0 && p <= 1))
            throw domain_error("forward_stop requires p in [0,1]");
        acc -= std::log1p(-p);
        const double fs = acc / static_cast<double>(k + 1);
        out.fs.push_back(fs);
        if (fs <= alpha)
            out.k_hat = k + 1;
    }
    return out;
}

// ALGFSM: per-candidate GoF p-values ordered by threshold, ForwardStop cutoff
// k_hat, selection at candidate k_hat + 1. Candidates whose Kappa fit fails
// get p = 0, which keeps fs small and so extends the rejected prefix past
// them; the selected candidate itself can never be one of those.
inline SelectionOutcome algfsm_select(const ObservationSample& sample,
                                      const CandidateGrid& grid, double alpha,
                                      std::size_t n_sims, const RandomStream& stream) {
    SelectionOutcome out;
    out.method = SelectionMethod::algfsm;
    out.diagnostics.reserve(grid.size());

    std::vector<double> pvalues;
    pvalues.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CandidateDiagnostic diag;
        diag.index = i;
        diag.u = grid.thresholds[i];
        diag.n_u = grid.exceedance_counts[i];
        try {
            const ObservationSample exc = excesses_above(sample, diag.u);
            const LStatSet ls = l_statistics(exc);
            diag.t3 = ls.t3;
            diag.t4 = ls.t4;
            // Candidate-keyed substream: results do not depend on evaluation
            // order or worker count.
            RandomStream cand_stream = stream.substream(i);
            const GofZResult gof = gof_z_statistic(exc, n_sims, cand_stream);
            diag.z = gof.z;
            diag.p = gof_pvalue(gof.z);
            diag.status = CandidateStatus::accepted; // provisional, rewritten below
        } catch (const error& e) {
            diag.status = CandidateStatus::indeterminate;
            diag.warnings.push_back(e.what());
            diag.p = 0.0;
        }
        pvalues.push_back(*diag.p);
        out.diagnostics.push_back(std::move(diag));
    }

    const ForwardStopResult fs = forward_stop(pvalues, alpha);
    for (std::size_t i = 0; i < out.diagnostics.size(); ++i) {
        out.diagnostics[i].fs = fs.fs[i];
        if (out.diagnostics[i].status != CandidateStatus::indeterminate)
            out.diagnostics[i].status =
                i < fs.k_hat ? CandidateStatus::rejected : CandidateStatus::accepted;
    }
    if (fs.k_hat < grid.size()) {
        out.selected_index = fs.k_hat;
        out.u_star = grid.thresholds[fs.k_hat];
        out.n_star = grid.exceedance_counts[fs.k_hat];
    }
    return out;
}

} // namespace lmpot
