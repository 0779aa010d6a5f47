#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "lmpot/benchmark.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Seeded Monte Carlo benchmark for threshold selectors"};
    std::string scenario_path, out_path;
    std::size_t workers = 1;
    app.add_option("--scenario", scenario_path, "scenario spec (JSON)")->required();
    app.add_option("--workers", workers, "worker threads (metrics are worker-independent)");
    app.add_option("--out", out_path, "write metrics JSON here (default stdout only)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        std::ifstream in(scenario_path);
        if (!in)
            throw lmpot::io_error("cannot open scenario: " + scenario_path);
        nlohmann::json spec_json;
        in >> spec_json;
        const lmpot::ScenarioSpec spec = lmpot::scenario_from_json(spec_json);
        const lmpot::BenchmarkMetrics metrics = lmpot::run_benchmark(spec, workers);
        const std::string text = lmpot::benchmark_metrics_to_json(metrics, spec).dump(2) + "\n";
        std::cout << text;
        if (!out_path.empty())
            lmpot::write_text_file(out_path, text);
        return 0;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: scenario parse: " << e.what() << "\n";
        return 2;
    } catch (const lmpot::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
