#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lmpot/errors.hpp"
#include "lmpot/gpd.hpp"
#include "lmpot/random.hpp"
#include "lmpot/sample.hpp"
#include "lmpot/selectors.hpp"

namespace lmpot {

enum class MethodChoice { alcbsm, algfsm, both };

struct PotConfig {
    std::size_t n_candidates = 10;
    std::optional<double> p_start; // empty selects the preset for n_candidates
    std::optional<double> p_end;
    double alpha_cb = 0.05;  // confidence-band level (ALCBSM)
    double alpha_gof = 0.1;  // ForwardStop level (ALGFSM)
    std::size_t n_sims = 500;
    std::uint64_t seed = 0;
    std::vector<double> return_periods_years{100.0, 10000.0};
    double obs_per_year = 1.0;
    MethodChoice method = MethodChoice::both;
};

inline void check_config(const PotConfig& c) {
    if (c.n_candidates < 2)
        throw domain_error("config: need at least 2 candidates");
    if (c.p_start || c.p_end) {
        if (!(c.p_start && c.p_end))
            throw domain_error("config: grid start and end must be overridden together");
        if (!(*c.p_start > 0 && *c.p_start < *c.p_end && *c.p_end < 1))
            throw domain_error("config: grid probabilities require 0 < start < end < 1");
    }
    if (!(c.alpha_cb > 0 && c.alpha_cb < 0.5))
        throw domain_error("config: alpha-cb outside (0, 0.5)");
    if (!(c.alpha_gof > 0 && c.alpha_gof < 1))
        throw domain_error("config: alpha outside (0, 1)");
    if (c.n_sims < 100)
        throw domain_error("config: nsim must be at least 100");
    if (!(c.obs_per_year > 0))
        throw domain_error("config: obs-per-year must be positive");
    for (double t : c.return_periods_years)
        if (!(t >= 1))
            throw domain_error("config: return periods must be >= 1 year");
}

// T-year return level above a selected threshold: the level exceeded once per
// T years on average, given zeta = n_u/n and m_y observations per year.
inline double return_level(double u_star, const GpdParams& params, double zeta,
                           double m_y, double t_years) {
    check_gpd(params);
    if (!(zeta > 0 && zeta <= 1))
        throw domain_error("return_level requires zeta in (0,1]");
    if (!(m_y > 0) || !(t_years > 0))
        throw domain_error("return_level requires positive m_y and T");
    const double s = t_years * m_y * zeta;
    if (!(s > 1))
        throw domain_error("return level not above threshold (T*m_y*zeta <= 1)");
    if (std::fabs(params.xi) < shape_limit_tol)
        return u_star + params.sigma * std::log(s);
    return u_star + params.sigma / params.xi * std::expm1(params.xi * std::log(s));
}

struct MethodResult {
    SelectionOutcome selection;
    std::optional<GpdFit> fit; // at the selected level
    std::optional<double> zeta;
    std::map<double, double> return_levels; // keyed by T in years
    std::vector<std::string> warnings;
};

struct PotReport {
    PotConfig config; // echo, with grid probabilities resolved
    std::size_t n = 0;
    std::optional<MethodResult> alcbsm;
    std::optional<MethodResult> algfsm;
    double elapsed_seconds = 0; // informational; not serialized
};

namespace detail {

inline MethodResult finish_method(const ObservationSample& sample, SelectionOutcome sel,
                                  const PotConfig& cfg) {
    MethodResult mr;
    mr.selection = std::move(sel);
    if (!mr.selection.selected_index)
        return mr;
    const ObservationSample exc = excesses_above(sample, *mr.selection.u_star);
    const GpdFit fit = gpd_fit_pwm(exc);
    mr.fit = fit;
    if (!fit.asymptotics_valid)
        mr.warnings.push_back("selected-level shape estimate outside asymptotic range");
    mr.zeta = static_cast<double>(*mr.selection.n_star) / static_cast<double>(sample.size());
    for (double t : cfg.return_periods_years) {
        try {
            mr.return_levels[t] =
                return_level(*mr.selection.u_star, fit.params, *mr.zeta, cfg.obs_per_year, t);
        } catch (const domain_error&) {
            mr.warnings.push_back("return period " + std::to_string(t) +
                                  " years lies below the selected threshold");
        }
    }
    return mr;
}

} // namespace detail

inline PotReport analyze(const ObservationSample& sample, const PotConfig& config) {
    check_config(config);
    const auto t0 = std::chrono::steady_clock::now();

    PotReport report;
    report.config = config;
    if (!report.config.p_start) {
        const auto preset = default_grid_probabilities(config.n_candidates);
        report.config.p_start = preset.first;
        report.config.p_end = preset.second;
    }
    report.n = sample.size();

    const CandidateGrid grid = build_grid(sample, report.config.n_candidates,
                                          *report.config.p_start, *report.config.p_end);
    if (config.method != MethodChoice::algfsm) {
        report.alcbsm = detail::finish_method(
            sample, alcbsm_select(sample, grid, config.alpha_cb), report.config);
    }
    if (config.method != MethodChoice::alcbsm) {
        const RandomStream stream(config.seed, 1);
        report.algfsm = detail::finish_method(
            sample, algfsm_select(sample, grid, config.alpha_gof, config.n_sims, stream),
            report.config);
    }
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

} // namespace lmpot
