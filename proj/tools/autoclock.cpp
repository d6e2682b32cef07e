// autoclock: runs one experiment from a JSON config and writes report.json and metrics.csv.
//
// Exit status: 0 all tolerances pass, 1 a tolerance failed, 2 config error, 3 numerical failure.

#include "autoclock/experiment/runner.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

namespace ex = autoclock::experiment;

int main(int argc, char** argv) {
    CLI::App app{"Autonomous-clock thermodynamics experiments"};
    std::string experiment, config_path, out_dir = ".";
    std::optional<std::uint64_t> seed;
    bool validate_only = false;
    app.add_option("experiment", experiment, "crossing | channel | protocol | laws")->required();
    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "override the config seed");
    app.add_flag("--validate", validate_only, "print diagnostics and exit without running");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    ex::ExperimentConfig cfg;
    try {
        cfg = ex::load_config(config_path, ex::parse_kind(experiment));
        if (seed) cfg.seed = *seed;
        const auto problems = ex::validate(cfg);
        for (const auto& p : problems) std::cerr << "config: " << p << "\n";
        if (!problems.empty()) return 2;
        if (validate_only) {
            std::cout << "config valid\n";
            return 0;
        }
    } catch (const ex::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    const auto start = std::chrono::steady_clock::now();
    ex::RunReport report;
    try {
        report = ex::run(cfg);
    } catch (const ex::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        ex::write_outputs(report, out_dir, wall);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    for (const auto& c : report.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.value << " " << c.relation << " " << c.limit << "\n";
    std::cout << (report.pass() ? "all tolerances pass" : "tolerance failure") << " (" << wall << " s)\n";
    return report.pass() ? 0 : 1;
}
