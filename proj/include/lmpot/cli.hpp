#pragma once

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lmpot/errors.hpp"
#include "lmpot/inference.hpp"
#include "lmpot/report_io.hpp"

namespace lmpot {

// Exit codes: 0 every requested method selected a threshold; 3 the analysis
// ran but some requested method selected none; 2 input or configuration
// error.
inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Automatic threshold selection for peaks-over-threshold analysis"};

    InputSpec input;
    PotConfig cfg;
    std::string method = "both";
    double grid_start = -1, grid_end = -1;
    std::string delimiter = ",";
    std::string out_report, out_diagnostics, out_lmrd;

    app.add_option("--input", input.path, "CSV file, one observation per row")->required();
    app.add_option("--column", input.column, "column index (0-based) or header name");
    app.add_option("--delimiter", delimiter, "field delimiter (default ',')");
    app.add_option("--method", method, "alcbsm, algfsm, or both")
        ->check(CLI::IsMember({"alcbsm", "algfsm", "both"}));
    app.add_option("--candidates", cfg.n_candidates, "number of candidate thresholds");
    app.add_option("--grid-start", grid_start, "lowest candidate quantile probability");
    app.add_option("--grid-end", grid_end, "highest candidate quantile probability");
    app.add_option("--alpha", cfg.alpha_gof, "ForwardStop level for the GoF method");
    app.add_option("--alpha-cb", cfg.alpha_cb, "confidence-band level for the LMRD method");
    app.add_option("--nsim", cfg.n_sims, "Kappa simulations per candidate");
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--rl", cfg.return_periods_years, "return periods in years")
        ->delimiter(',');
    app.add_option("--obs-per-year", cfg.obs_per_year, "average observations per year");
    app.add_option("--out-report", out_report, "write the JSON report here");
    app.add_option("--out-diagnostics", out_diagnostics, "write the TSV diagnostics here");
    app.add_option("--out-lmrd", out_lmrd, "write the LMRD export CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (delimiter.size() != 1)
            throw domain_error("delimiter must be a single character");
        input.delimiter = delimiter[0];
        cfg.method = method_choice_from(method);
        if (grid_start >= 0 || grid_end >= 0) {
            cfg.p_start = grid_start;
            cfg.p_end = grid_end;
        }

        const ObservationSample sample = read_observations(input);
        const PotReport report = analyze(sample, cfg);

        for (const MethodResult* mr : {report.alcbsm ? &*report.alcbsm : nullptr,
                                       report.algfsm ? &*report.algfsm : nullptr}) {
            if (!mr)
                continue;
            const std::string name = method_name(mr->selection.method);
            if (mr->selection.selected_index) {
                std::cout << name << ": u* = " << detail::fmt6(*mr->selection.u_star)
                          << " (candidate " << *mr->selection.selected_index + 1 << " of "
                          << mr->selection.diagnostics.size()
                          << ", n_u = " << *mr->selection.n_star << ")\n";
                if (mr->fit)
                    std::cout << "  GPd fit: sigma = " << detail::fmt6(mr->fit->params.sigma)
                              << ", xi = " << detail::fmt6(mr->fit->params.xi) << "\n";
                for (const auto& [t, level] : mr->return_levels)
                    std::cout << "  RL " << detail::fmt6(t)
                              << "y = " << detail::fmt6(level) << "\n";
            } else {
                std::cout << name << ": no threshold selected\n";
            }
            for (const std::string& w : mr->warnings)
                std::cout << "  warning: " << w << "\n";
        }

        if (!out_report.empty())
            write_report(report, out_report);
        if (!out_diagnostics.empty())
            write_diagnostics(report, out_diagnostics);
        if (!out_lmrd.empty()) {
            const SelectionOutcome& src =
                report.alcbsm ? report.alcbsm->selection : report.algfsm->selection;
            write_lmrd(build_lmrd_export(src), out_lmrd);
        }

        const bool all_selected =
            (!report.alcbsm || report.alcbsm->selection.selected_index) &&
            (!report.algfsm || report.algfsm->selection.selected_index);
        return all_selected ? 0 : 3;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace lmpot
