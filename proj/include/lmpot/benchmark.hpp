#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"

#include "lmpot/errors.hpp"
#include "lmpot/gpd.hpp"
#include "lmpot/inference.hpp"
#include "lmpot/kappa.hpp"
#include "lmpot/normal.hpp"
#include "lmpot/random.hpp"
#include "lmpot/report_io.hpp"
#include "lmpot/sample.hpp"

namespace lmpot {

// Monte Carlo parents with a known tail, so selection and estimation can be
// scored against a ground truth.
struct GpdParent {
    GpdParams params;
};
struct KappaParent {
    KappaParams params;
};
// Lognormal body below its q0-quantile, exact GPd tail above it (shifted to
// start at the splice point, so the parent is continuous and every threshold
// at or above the splice has exactly GPd excesses).
struct SplicedParent {
    double meanlog = 0;
    double sdlog = 1;
    GpdParams tail{1.0, 0.1};
    double q0 = 0.6;
};
using Parent = std::variant<GpdParent, KappaParent, SplicedParent>;

struct ScenarioSpec {
    Parent parent;
    std::size_t n = 500;
    std::size_t reps = 200;
    PotConfig analysis; // methods, grid, alphas, N, seed, return periods
};

inline void check_scenario(const ScenarioSpec& spec) {
    check_config(spec.analysis);
    if (spec.reps < 1)
        throw domain_error("scenario: reps must be >= 1");
    if (spec.n < 20)
        throw domain_error("scenario: n must be >= 20");
    if (const auto* g = std::get_if<GpdParent>(&spec.parent)) {
        check_gpd(g->params);
    } else if (const auto* k = std::get_if<KappaParent>(&spec.parent)) {
        check_kappa(k->params);
    } else {
        const auto& s = std::get<SplicedParent>(spec.parent);
        check_gpd(s.tail);
        if (!(s.sdlog > 0))
            throw domain_error("scenario: sdlog must be positive");
        if (!(s.q0 > 0 && s.q0 < 1))
            throw domain_error("scenario: splice quantile must be inside (0,1)");
    }
}

inline double parent_quantile(const Parent& parent, double p) {
    if (const auto* g = std::get_if<GpdParent>(&parent))
        return gpd_quantile(p, g->params);
    if (const auto* k = std::get_if<KappaParent>(&parent))
        return kappa_quantile(p, k->params);
    const auto& s = std::get<SplicedParent>(parent);
    if (p < s.q0)
        return std::exp(s.meanlog + s.sdlog * std_normal_quantile(p));
    const double splice = std::exp(s.meanlog + s.sdlog * std_normal_quantile(s.q0));
    return splice + gpd_quantile((p - s.q0) / (1 - s.q0), s.tail);
}

inline double parent_tail_xi(const Parent& parent) {
    if (const auto* g = std::get_if<GpdParent>(&parent))
        return g->params.xi;
    if (const auto* k = std::get_if<KappaParent>(&parent))
        return k->params.xi;
    return std::get<SplicedParent>(parent).tail.xi;
}

inline ObservationSample draw_parent(const Parent& parent, std::size_t n,
                                     RandomStream& stream) {
    std::vector<double> x;
    x.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        x.push_back(parent_quantile(parent, stream.uniform01()));
    return ObservationSample::from_unsorted(std::move(x));
}

struct MethodMetrics {
    std::vector<double> selection_freq; // per candidate, over completed reps
    double none_rate = 0;
    std::size_t n_selected = 0;
    double xi_bias = 0;  // over replicates with a selection
    double xi_rmse = 0;
    std::map<double, double> rl_rel_bias; // per return period, vs the parent
    std::optional<double> z_first_reject_rate; // fraction |z_1| > 1.645 (ALGFSM)
};

struct BenchmarkMetrics {
    std::size_t reps_completed = 0;
    std::size_t reps_failed = 0;
    std::optional<MethodMetrics> alcbsm, algfsm;
    double mean_runtime_ms = 0;
};

namespace detail {

struct MethodRep {
    bool ran = false;
    std::optional<std::size_t> selected;
    std::optional<double> xi_hat;
    std::map<double, double> return_levels;
    std::optional<double> z_first;
};

struct RepOutcome {
    bool failed = false;
    double runtime_ms = 0;
    MethodRep alcbsm, algfsm;
};

inline MethodRep summarize_method(const MethodResult& mr) {
    MethodRep rep;
    rep.ran = true;
    rep.selected = mr.selection.selected_index;
    if (mr.fit)
        rep.xi_hat = mr.fit->params.xi;
    rep.return_levels = mr.return_levels;
    if (!mr.selection.diagnostics.empty())
        rep.z_first = mr.selection.diagnostics.front().z;
    return rep;
}

inline RepOutcome run_replicate(const ScenarioSpec& spec, std::size_t r) {
    RepOutcome out;
    try {
        const RandomStream master(spec.analysis.seed, 0);
        RandomStream data_stream = master.substream(2 * r);
        PotConfig cfg = spec.analysis;
        cfg.seed = master.fork_seed(2 * r + 1);
        const ObservationSample sample = draw_parent(spec.parent, spec.n, data_stream);
        const PotReport report = analyze(sample, cfg);
        out.runtime_ms = report.elapsed_seconds * 1e3;
        if (report.alcbsm)
            out.alcbsm = summarize_method(*report.alcbsm);
        if (report.algfsm)
            out.algfsm = summarize_method(*report.algfsm);
    } catch (const error&) {
        out.failed = true;
    }
    return out;
}

inline MethodMetrics aggregate_method(const std::vector<RepOutcome>& reps,
                                      MethodRep RepOutcome::* field, std::size_t n_cand,
                                      double true_xi, const std::map<double, double>& true_rl,
                                      bool with_z_rate) {
    MethodMetrics m;
    m.selection_freq.assign(n_cand, 0.0);
    std::size_t completed = 0, none = 0;
    double xi_sum = 0, xi_sq = 0;
    std::map<double, double> rl_sum;
    std::map<double, std::size_t> rl_n;
    std::size_t z_n = 0, z_reject = 0;
    for (const RepOutcome& r : reps) {
        const MethodRep& rep = r.*field;
        if (r.failed || !rep.ran)
            continue;
        ++completed;
        if (rep.selected) {
            m.selection_freq[*rep.selected] += 1;
            if (rep.xi_hat) {
                ++m.n_selected;
                xi_sum += *rep.xi_hat - true_xi;
                xi_sq += (*rep.xi_hat - true_xi) * (*rep.xi_hat - true_xi);
            }
            for (const auto& [t, level] : rep.return_levels) {
                const auto it = true_rl.find(t);
                if (it != true_rl.end() && it->second != 0) {
                    rl_sum[t] += (level - it->second) / it->second;
                    rl_n[t] += 1;
                }
            }
        } else {
            ++none;
        }
        if (with_z_rate && rep.z_first) {
            ++z_n;
            if (std::fabs(*rep.z_first) > 1.645)
                ++z_reject;
        }
    }
    if (completed > 0) {
        for (double& f : m.selection_freq)
            f /= static_cast<double>(completed);
        m.none_rate = static_cast<double>(none) / static_cast<double>(completed);
    }
    if (m.n_selected > 0) {
        m.xi_bias = xi_sum / static_cast<double>(m.n_selected);
        m.xi_rmse = std::sqrt(xi_sq / static_cast<double>(m.n_selected));
    }
    for (const auto& [t, acc] : rl_sum)
        m.rl_rel_bias[t] = acc / static_cast<double>(rl_n[t]);
    if (with_z_rate && z_n > 0)
        m.z_first_reject_rate = static_cast<double>(z_reject) / static_cast<double>(z_n);
    return m;
}

} // namespace detail

inline BenchmarkMetrics run_benchmark(const ScenarioSpec& spec, std::size_t workers = 1) {
    check_scenario(spec);
    std::vector<detail::RepOutcome> reps(spec.reps);
    const std::size_t w = std::max<std::size_t>(1, std::min(workers, spec.reps));
    if (w == 1) {
        for (std::size_t r = 0; r < spec.reps; ++r)
            reps[r] = detail::run_replicate(spec, r);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(w);
        for (std::size_t wi = 0; wi < w; ++wi) {
            pool.emplace_back([&, wi] {
                for (std::size_t r = wi; r < spec.reps; r += w)
                    reps[r] = detail::run_replicate(spec, r);
            });
        }
        for (std::thread& t : pool)
            t.join();
    }

    BenchmarkMetrics metrics;
    double runtime_sum = 0;
    for (const detail::RepOutcome& r : reps) {
        if (r.failed) {
            ++metrics.reps_failed;
        } else {
            ++metrics.reps_completed;
            runtime_sum += r.runtime_ms;
        }
    }
    if (metrics.reps_completed > 0)
        metrics.mean_runtime_ms = runtime_sum / static_cast<double>(metrics.reps_completed);

    const double true_xi = parent_tail_xi(spec.parent);
    std::map<double, double> true_rl;
    for (double t : spec.analysis.return_periods_years) {
        const double s = t * spec.analysis.obs_per_year;
        if (s > 1)
            true_rl[t] = parent_quantile(spec.parent, 1 - 1 / s);
    }
    const std::size_t n_cand = spec.analysis.n_candidates;
    if (spec.analysis.method != MethodChoice::algfsm)
        metrics.alcbsm = detail::aggregate_method(reps, &detail::RepOutcome::alcbsm, n_cand,
                                                  true_xi, true_rl, false);
    if (spec.analysis.method != MethodChoice::alcbsm)
        metrics.algfsm = detail::aggregate_method(reps, &detail::RepOutcome::algfsm, n_cand,
                                                  true_xi, true_rl, true);
    return metrics;
}

// ------------------------------------------------------------------ JSON ----

inline nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
    nlohmann::json parent;
    if (const auto* g = std::get_if<GpdParent>(&spec.parent)) {
        parent = {{"kind", "gpd"}, {"sigma", g->params.sigma}, {"xi", g->params.xi}};
    } else if (const auto* k = std::get_if<KappaParent>(&spec.parent)) {
        parent = {{"kind", "kappa"},
                  {"mu", k->params.mu},
                  {"sigma", k->params.sigma},
                  {"xi", k->params.xi},
                  {"h", k->params.h}};
    } else {
        const auto& s = std::get<SplicedParent>(spec.parent);
        parent = {{"kind", "spliced"},     {"meanlog", s.meanlog},
                  {"sdlog", s.sdlog},      {"tail_sigma", s.tail.sigma},
                  {"tail_xi", s.tail.xi},  {"q0", s.q0}};
    }
    const PotConfig& c = spec.analysis;
    return {{"parent", parent},
            {"n", spec.n},
            {"reps", spec.reps},
            {"method", method_choice_name(c.method)},
            {"candidates", c.n_candidates},
            {"p_start", c.p_start ? nlohmann::json(*c.p_start) : nlohmann::json()},
            {"p_end", c.p_end ? nlohmann::json(*c.p_end) : nlohmann::json()},
            {"alpha", c.alpha_gof},
            {"alpha_cb", c.alpha_cb},
            {"nsim", c.n_sims},
            {"seed", c.seed},
            {"return_periods_years", c.return_periods_years},
            {"obs_per_year", c.obs_per_year}};
}

inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
    ScenarioSpec spec;
    const nlohmann::json& p = j.at("parent");
    const std::string kind = p.at("kind");
    if (kind == "gpd") {
        spec.parent = GpdParent{{p.at("sigma"), p.at("xi")}};
    } else if (kind == "kappa") {
        spec.parent = KappaParent{{p.at("mu"), p.at("sigma"), p.at("xi"), p.at("h")}};
    } else if (kind == "spliced") {
        SplicedParent s;
        s.meanlog = p.at("meanlog");
        s.sdlog = p.at("sdlog");
        s.tail = {p.at("tail_sigma"), p.at("tail_xi")};
        s.q0 = p.at("q0");
        spec.parent = s;
    } else {
        throw io_error("unknown parent kind: " + kind);
    }
    spec.n = j.at("n").get<std::size_t>();
    spec.reps = j.at("reps").get<std::size_t>();
    PotConfig& c = spec.analysis;
    if (j.contains("method"))
        c.method = method_choice_from(j.at("method"));
    if (j.contains("candidates"))
        c.n_candidates = j.at("candidates").get<std::size_t>();
    if (j.contains("p_start") && j.at("p_start").is_number())
        c.p_start = j.at("p_start").get<double>();
    if (j.contains("p_end") && j.at("p_end").is_number())
        c.p_end = j.at("p_end").get<double>();
    if (j.contains("alpha"))
        c.alpha_gof = j.at("alpha").get<double>();
    if (j.contains("alpha_cb"))
        c.alpha_cb = j.at("alpha_cb").get<double>();
    if (j.contains("nsim"))
        c.n_sims = j.at("nsim").get<std::size_t>();
    if (j.contains("seed"))
        c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("return_periods_years"))
        c.return_periods_years = j.at("return_periods_years").get<std::vector<double>>();
    if (j.contains("obs_per_year"))
        c.obs_per_year = j.at("obs_per_year").get<double>();
    return spec;
}

namespace detail {

inline nlohmann::json method_metrics_to_json(const MethodMetrics& m) {
    nlohmann::json j;
    j["selection_freq"] = m.selection_freq;
    j["none_rate"] = m.none_rate;
    j["n_selected"] = m.n_selected;
    j["xi_bias"] = m.xi_bias;
    j["xi_rmse"] = m.xi_rmse;
    nlohmann::json rl = nlohmann::json::object();
    for (const auto& [t, v] : m.rl_rel_bias)
        rl[fmt17(t)] = v;
    j["rl_rel_bias"] = rl;
    if (m.z_first_reject_rate)
        j["z_first_reject_rate"] = *m.z_first_reject_rate;
    return j;
}

} // namespace detail

inline nlohmann::json benchmark_metrics_to_json(const BenchmarkMetrics& m,
                                                const ScenarioSpec& spec) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["scenario"] = scenario_to_json(spec);
    j["reps_completed"] = m.reps_completed;
    j["reps_failed"] = m.reps_failed;
    nlohmann::json methods = nlohmann::json::object();
    if (m.alcbsm)
        methods["alcbsm"] = detail::method_metrics_to_json(*m.alcbsm);
    if (m.algfsm)
        methods["algfsm"] = detail::method_metrics_to_json(*m.algfsm);
    j["methods"] = std::move(methods);
    j["timing"] = {{"mean_runtime_ms", m.mean_runtime_ms}};
    return j;
}

} // namespace lmpot
