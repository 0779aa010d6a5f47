#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

#include "lmpot/benchmark.hpp"
#include "lmpot/errors.hpp"
#include "lmpot/gpd.hpp"
#include "lmpot/random.hpp"
#include "lmpot/selectors.hpp"

using namespace lmpot;

namespace {

ScenarioSpec small_scenario(std::uint64_t seed) {
    ScenarioSpec spec;
    spec.parent = GpdParent{{1.0, 0.2}};
    spec.n = 300;
    spec.reps = 8;
    spec.analysis.n_candidates = 6;
    spec.analysis.p_start = 0.25;
    spec.analysis.p_end = 0.9;
    spec.analysis.n_sims = 100;
    spec.analysis.seed = seed;
    return spec;
}

nlohmann::json metrics_sans_timing(const BenchmarkMetrics& m, const ScenarioSpec& spec) {
    nlohmann::json j = benchmark_metrics_to_json(m, spec);
    j.erase("timing");
    return j;
}

} // namespace

TEST_CASE("scenario JSON round-trips for every parent kind") {
    ScenarioSpec gpd;
    gpd.parent = GpdParent{{2.0, -0.1}};
    gpd.n = 400;
    gpd.reps = 50;
    gpd.analysis.seed = 11;

    ScenarioSpec kap;
    kap.parent = KappaParent{{0.5, 1.5, 0.1, -0.5}};
    kap.analysis.n_candidates = 7;
    kap.analysis.p_start = 0.3;
    kap.analysis.p_end = 0.8;

    ScenarioSpec spl;
    spl.parent = SplicedParent{0.2, 0.9, {1.5, 0.05}, 0.7};
    spl.analysis.method = MethodChoice::algfsm;

    for (const ScenarioSpec& spec : {gpd, kap, spl}) {
        const nlohmann::json j = scenario_to_json(spec);
        const ScenarioSpec back = scenario_from_json(j);
        REQUIRE(scenario_to_json(back) == j);
    }

    // unset grid endpoints serialize as null and stay unset
    const nlohmann::json j = scenario_to_json(gpd);
    REQUIRE(j.at("p_start").is_null());
    REQUIRE_FALSE(scenario_from_json(j).analysis.p_start.has_value());

    nlohmann::json bad = scenario_to_json(gpd);
    bad["parent"]["kind"] = "weibull";
    REQUIRE_THROWS_AS(scenario_from_json(bad), io_error);
}

TEST_CASE("scenario validation") {
    ScenarioSpec spec = small_scenario(1);

    ScenarioSpec no_reps = spec;
    no_reps.reps = 0;
    REQUIRE_THROWS_AS(check_scenario(no_reps), domain_error);

    ScenarioSpec tiny = spec;
    tiny.n = 10;
    REQUIRE_THROWS_AS(check_scenario(tiny), domain_error);

    ScenarioSpec bad_splice = spec;
    bad_splice.parent = SplicedParent{0, 1, {1.0, 0.1}, 1.0};
    REQUIRE_THROWS_AS(check_scenario(bad_splice), domain_error);

    ScenarioSpec bad_body = spec;
    bad_body.parent = SplicedParent{0, 0.0, {1.0, 0.1}, 0.6};
    REQUIRE_THROWS_AS(check_scenario(bad_body), domain_error);
}

TEST_CASE("spliced parent is continuous at the splice and GPd beyond it") {
    const SplicedParent s;
    const Parent parent = s;
    const double splice = parent_quantile(parent, s.q0);
    REQUIRE(splice == std::exp(s.meanlog + s.sdlog * std_normal_quantile(s.q0)));
    REQUIRE(parent_quantile(parent, s.q0 - 1e-12) == Catch::Approx(splice).margin(1e-9));

    double prev = parent_quantile(parent, 0.001);
    for (double p = 0.011; p < 0.999; p += 0.01) {
        const double q = parent_quantile(parent, p);
        REQUIRE(q > prev);
        prev = q;
    }

    // above the splice the excess quantiles are exactly the tail GPd's
    const double p = 0.9;
    REQUIRE(parent_quantile(parent, p) - splice ==
            Catch::Approx(gpd_quantile((p - s.q0) / (1 - s.q0), s.tail)).margin(1e-12));

    REQUIRE(parent_tail_xi(parent) == s.tail.xi);
    REQUIRE(parent_tail_xi(GpdParent{{1.0, -0.3}}) == -0.3);
    REQUIRE(parent_tail_xi(KappaParent{{0, 1, 0.25, -0.5}}) == 0.25);
}

TEST_CASE("spliced excesses above the splice recover the tail shape") {
    const SplicedParent s;
    const Parent parent = s;
    const double splice = parent_quantile(parent, s.q0);
    double xi_sum = 0;
    const std::size_t reps = 60;
    for (std::size_t r = 0; r < reps; ++r) {
        RandomStream stream(77, r);
        const ObservationSample sample = draw_parent(parent, 1000, stream);
        xi_sum += gpd_fit_pwm(excesses_above(sample, splice)).params.xi;
    }
    REQUIRE(xi_sum / static_cast<double>(reps) ==
            Catch::Approx(s.tail.xi).margin(0.03));
}

TEST_CASE("benchmark runs are deterministic") {
    const ScenarioSpec spec = small_scenario(7);
    const BenchmarkMetrics a = run_benchmark(spec);
    const BenchmarkMetrics b = run_benchmark(spec);
    REQUIRE(metrics_sans_timing(a, spec) == metrics_sans_timing(b, spec));
    REQUIRE(a.reps_completed == 8);
    REQUIRE(a.reps_failed == 0);
    REQUIRE(a.mean_runtime_ms > 0);
    REQUIRE(a.alcbsm.has_value());
    REQUIRE(a.algfsm.has_value());

    // z calibration is an ALGFSM-only diagnostic
    REQUIRE_FALSE(a.alcbsm->z_first_reject_rate.has_value());
    REQUIRE(a.algfsm->z_first_reject_rate.has_value());
}

TEST_CASE("worker count does not change the metrics") {
    const ScenarioSpec spec = small_scenario(13);
    const BenchmarkMetrics serial = run_benchmark(spec, 1);
    const BenchmarkMetrics threaded = run_benchmark(spec, 3);
    REQUIRE(metrics_sans_timing(serial, spec) == metrics_sans_timing(threaded, spec));
}

TEST_CASE("selection frequencies and the none rate partition the replicates") {
    const BenchmarkMetrics m = run_benchmark(small_scenario(21));
    REQUIRE(m.alcbsm.has_value());
    REQUIRE(m.algfsm.has_value());
    for (const MethodMetrics* mm : {&*m.alcbsm, &*m.algfsm}) {
        const double freq_sum =
            std::accumulate(mm->selection_freq.begin(), mm->selection_freq.end(), 0.0);
        REQUIRE(freq_sum + mm->none_rate == Catch::Approx(1.0).margin(1e-12));
        for (double f : mm->selection_freq)
            REQUIRE((f >= 0 && f <= 1));
    }
}

TEST_CASE("failed replicates are counted, not fatal") {
    ScenarioSpec spec;
    spec.parent = GpdParent{{1.0, 0.1}};
    spec.n = 25; // the top preset candidates leave fewer than 4 excesses
    spec.reps = 5;
    spec.analysis.seed = 3;
    const BenchmarkMetrics m = run_benchmark(spec);
    REQUIRE(m.reps_failed == 5);
    REQUIRE(m.reps_completed == 0);
    REQUIRE(m.alcbsm.has_value());
    for (double f : m.alcbsm->selection_freq)
        REQUIRE(f == 0.0);
    REQUIRE(m.alcbsm->none_rate == 0.0);
}

// The first-candidate GoF z statistic is built from a simulated null that
// conditions on the fitted Kappa surrogate, which makes it under-dispersed
// relative to N(0,1) on exact GPd data. A nominal-level rejection rate near
// the 10% target is therefore not achievable by this construction; the
// measured rate sits near 3%. Kept as a failing check so the gap stays
// visible rather than being tuned away.
TEST_CASE("z-statistic calibration against the nominal 10% level", "[!shouldfail]") {
    ScenarioSpec spec;
    spec.parent = GpdParent{{1.0, -0.2}};
    spec.n = 500;
    spec.reps = 150;
    spec.analysis.method = MethodChoice::algfsm;
    spec.analysis.n_candidates = 4;
    spec.analysis.p_start = 0.25;
    spec.analysis.p_end = 0.9;
    spec.analysis.n_sims = 150;
    spec.analysis.seed = 99;
    const BenchmarkMetrics m = run_benchmark(spec);
    REQUIRE(m.algfsm.has_value());
    REQUIRE(m.algfsm->z_first_reject_rate.has_value());
    const double rate = *m.algfsm->z_first_reject_rate;
    std::printf("[benchmark] first-candidate |z| > 1.645 rate: %.4f (nominal 0.10)\n", rate);
    REQUIRE(rate >= 0.07);
    REQUIRE(rate <= 0.13);
}
