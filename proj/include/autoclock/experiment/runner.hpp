// runner.hpp: dispatches a validated config to its module and assembles the report,
// the metric table and the tolerance checks.

#pragma once

#include "autoclock/clock/crossing.hpp"
#include "autoclock/experiment/config.hpp"
#include "autoclock/protocol/run.hpp"
#include "autoclock/thermo/scenarios.hpp"
#include "autoclock/weight/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace autoclock::experiment {

inline constexpr const char* kVersion = "autoclock 0.1.0";
inline constexpr int kMetricsSchemaVersion = 1;

// Non-finite result or failure inside a module while running a valid config.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MetricTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row) {
        if (row.size() != columns.size()) throw std::logic_error("MetricTable: row width mismatch");
        for (double v : row)
            if (!std::isfinite(v)) throw NumericalError("non-finite metric value");
        rows.push_back(std::move(row));
    }

    std::string csv() const {
        std::string out;
        for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
        out += "\n";
        char buf[32];
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", row[c]);
                out += (c ? "," : "") + std::string(buf);
            }
            out += "\n";
        }
        return out;
    }
};

struct Check {
    std::string name;
    double value{0.0};
    double limit{0.0};
    std::string relation;  // "<=", ">=", ">"
    bool pass{false};
};

struct RunReport {
    ExperimentConfig config;
    std::vector<std::string> diagnostics;
    json runs = json::array();
    MetricTable metrics;
    std::vector<Check> checks;

    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }

    json to_json() const {
        json j;
        j["version"] = kVersion;
        j["experiment"] = to_string(config.kind);
        j["seed"] = config.seed;
        j["config"] = config.document;
        j["metrics_schema"] = {{"name", to_string(config.kind)}, {"version", kMetricsSchemaVersion}, {"columns", metrics.columns}};
        j["diagnostics"] = diagnostics;
        j["runs"] = runs;
        json cs = json::array();
        for (const auto& c : checks)
            cs.push_back({{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"relation", c.relation}, {"pass", c.pass}});
        j["checks"] = cs;
        j["pass"] = pass();
        return j;
    }
};

namespace detail {

inline double finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what);
    return v;
}

inline Check at_most(std::string name, double value, double limit) {
    return {std::move(name), finite(value, "check value"), limit, "<=", value <= limit};
}
inline Check at_least(std::string name, double value, double limit) {
    return {std::move(name), finite(value, "check value"), limit, ">=", value >= limit};
}

inline json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

inline json ledger_json(const thermo::ThermoLedger& l) {
    return {{"dU", l.delta_U}, {"W", l.W}, {"Q", l.Q}, {"dF_u", l.delta_F_u}, {"dS_u", l.delta_S_u},
            {"dS_b", l.delta_S_b}, {"dF_b", l.delta_F_b}, {"T", l.T}, {"mode", thermo::to_string(l.mode)}};
}

inline weight::WeightDistribution make_weight(const WeightSpec& w) { return weight::WeightDistribution::gaussian(w.p0, w.sigma, w.points); }

inline void run_crossing(const CrossingParams& p, RunReport& rep) {
    using namespace autoclock::clock;
    const Operator h = resolve_hamiltonian(p.hamiltonian);
    const Operator u = resolve_unitary(p.target, h.dim());
    const DensityMatrix rho = resolve_state(p.state, h, 1.0);
    const ClockGrid grid(p.points, p.period, p.origin);
    ClockMixture clock;
    if (p.clock.empty()) clock = ClockMixture::pure(ClockState::gaussian(grid, p.support));
    for (const auto& b : p.clock) {
        clock.weights.push_back(b.weight);
        clock.states.push_back(ClockState::gaussian(grid, p.support, b.center.value_or(0.5 * (p.support.lo + p.support.hi)),
                                                    b.sigma.value_or(p.support.length() / 10.0)));
    }
    const InteractionWindow window(p.window_start, p.window_length, p.profile);
    const CrossingSetup setup{build_total_hamiltonian(EngineSpec(h, u), window, grid, p.support), clock, rho, p.dt};
    const double tau = setup.hamiltonian.crossing_time();
    rep.metrics.columns = {"t", "t_over_tau", "engine_error", "clock_error", "product_error"};
    for (double f : p.time_factors) {
        const double t = f * tau;
        const CrossingReport r = simulate_crossing(setup, t);
        rep.metrics.add({t, f, r.engine_error, r.clock_error, r.product_error});
        const bool crossed = t > tau;
        rep.runs.push_back({{"t", t}, {"tau", tau}, {"crossed", crossed}, {"engine_error", r.engine_error},
                            {"clock_error", r.clock_error}, {"product_error", r.product_error},
                            {"engine_state", matrix_json(r.engine_state.matrix())}});
        if (!crossed) continue;  // before the crossing completes the errors are informational
        const std::string at = " at t=" + std::to_string(t);
        rep.checks.push_back(at_most("engine_error" + at, r.engine_error, p.tol_engine));
        rep.checks.push_back(at_most("clock_error" + at, r.clock_error, p.tol_clock));
        rep.checks.push_back(at_most("product_error" + at, r.product_error, p.tol_product));
    }
    if (rep.checks.empty()) rep.diagnostics.push_back("no time factor exceeds 1; nothing to check against tolerances");
}

inline void run_channel(const ChannelParams& p, RunReport& rep) {
    const Operator h = resolve_hamiltonian(p.hamiltonian);
    const Operator v = resolve_unitary(p.target, h.dim());
    const DensityMatrix rho = resolve_state(p.state, h, 1.0);
    const weight::SystemSpec spec(h);
    const weight::WeightDistribution mu = make_weight(p.weight);
    rep.metrics.columns = {"delta", "error"};
    std::vector<double> errors;
    for (double d : p.deltas) {
        const auto r = weight::channel_report(rho, spec, v, rescale_distribution(mu, d));
        errors.push_back(finite(r.error, "channel error"));
        rep.metrics.add({d, r.error});
        rep.runs.push_back({{"delta", d}, {"error", r.error}, {"width", r.width}, {"nodes", r.nodes}});
    }
    double worst = 0.0;  // largest relative increase between consecutive sweep points
    for (std::size_t k = 1; k < errors.size(); ++k)
        if (errors[k - 1] > 0.0) worst = std::max(worst, errors[k] / errors[k - 1] - 1.0);
    if (errors.size() > 1) rep.checks.push_back(at_most("sweep monotone (max relative increase)", worst, p.tol_jitter));
    rep.checks.push_back(at_most("final error", errors.back(), p.tol_final_error));
}

inline void run_protocol_experiment(const ProtocolParams& p, RunReport& rep) {
    const Operator h = resolve_hamiltonian(p.hamiltonian);
    const DensityMatrix rho0 = resolve_state(p.initial_state, h, p.temperature);
    const DensityMatrix sigma = resolve_state(p.target_state, h, p.temperature);
    protocol::ProtocolOptions opt;
    if (p.weight) opt.weight = make_weight(*p.weight);
    rep.metrics.columns = {"delta_p", "steps", "W", "free_energy_drop", "gap", "epsilon_prime", "margin", "error", "first_law_residual"};
    std::vector<std::pair<double, double>> gaps;
    for (double dp : p.delta_p) {
        const protocol::TransformTask task{h, rho0, sigma, p.temperature, dp, p.eta};
        const protocol::ProtocolReport r = protocol::run_protocol(task, opt);
        rep.metrics.add({dp, static_cast<double>(r.steps), r.ledger.W, r.free_energy_drop, r.gap, r.epsilon_prime, r.margin, r.error,
                         r.first_law_residual});
        rep.runs.push_back({{"delta_p", dp},
                            {"path", r.path},
                            {"steps", r.steps},
                            {"ledger", ledger_json(r.ledger)},
                            {"free_energy_drop", r.free_energy_drop},
                            {"gap", r.gap},
                            {"epsilon_prime", r.epsilon_prime},
                            {"margin", r.margin},
                            {"rank_floor_term", r.rank_floor_term},
                            {"max_bath_energy", r.max_bath_energy},
                            {"gibbs_step_constant", r.gibbs_step_constant},
                            {"error", r.error},
                            {"error_vs_regularized", r.error_vs_regularized},
                            {"final_state", matrix_json(r.final_state.matrix())}});
        const double scale = p.gap_scale == GapScale::delta_p ? dp : dp * std::max(1.0, r.max_bath_energy);
        const std::string at = " at delta_p=" + std::to_string(dp);
        rep.checks.push_back(at_most("gap" + at, r.gap, p.tol_gap_factor * scale));
        rep.checks.push_back(at_most("state error" + at, r.error, p.tol_state_error));
        if (p.expected_work)
            rep.checks.push_back(at_most("|W - expected|" + at, std::abs(r.ledger.W - *p.expected_work), p.tol_gap_factor * scale));
        gaps.emplace_back(dp, r.gap);
    }
    std::sort(gaps.begin(), gaps.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    double rise = -1.0;  // largest increase of the gap when delta_p shrinks
    for (std::size_t k = 1; k < gaps.size(); ++k) rise = std::max(rise, gaps[k].second - gaps[k - 1].second);
    if (gaps.size() > 1) rep.checks.push_back(at_most("gap decreasing in delta_p (max increase)", rise, 0.0));
}

inline void run_laws(const LawsParams& p, std::uint64_t seed, RunReport& rep) {
    RandomSource rng(seed);
    rep.metrics.columns = {"scenario_id", "dU", "W", "Q", "dF_u", "first_law_residual", "second_law_margin", "entropy_delta"};
    double worst_first = 0.0, worst_second = 1e300, worst_entropy = 1e300, cyclic_w = -1e300;
    int cyclic = 0;
    for (int k = 0; k < p.scenarios; ++k) {
        const bool is_cyclic = p.cyclic_every > 0 && k % p.cyclic_every == 0;
        const thermo::ScenarioOutcome o = thermo::run_law_scenario(thermo::random_law_scenario(rng, is_cyclic), p.sites);
        const auto& l = o.ledger;
        rep.metrics.add({static_cast<double>(k), l.delta_U, l.W, l.Q, l.delta_F_u, o.first_law_residual, o.second_law_margin,
                         o.entropy_delta_ub});
        worst_first = std::max(worst_first, std::abs(o.first_law_residual));
        worst_second = std::min(worst_second, o.second_law_margin);
        worst_entropy = std::min(worst_entropy, o.entropy_delta_ub);
        if (is_cyclic) {
            cyclic_w = std::max(cyclic_w, l.W);
            ++cyclic;
        }
    }
    rep.runs.push_back({{"scenarios", p.scenarios}, {"cyclic", cyclic}});
    rep.checks.push_back(at_most("max |dU + W + Q|", worst_first, p.tol_first_law));
    rep.checks.push_back(at_least("min second-law margin", worst_second, -p.tol_second_law));
    rep.checks.push_back(at_least("min entropy change of u(x)b", worst_entropy, -p.tol_entropy));
    if (cyclic > 0) rep.checks.push_back(at_most("max W over cyclic scenarios", cyclic_w, p.tol_second_law));
    if (p.noncompliant_control) {
        const thermo::ScenarioOutcome bad = thermo::run_noncompliant_scenario(thermo::random_law_scenario(rng, false));
        rep.runs.push_back({{"noncompliant_control", {{"first_law_residual", bad.first_law_residual}, {"ledger", ledger_json(bad.ledger)}}}});
        Check c{"non-compliant control flagged (|residual|)", finite(std::abs(bad.first_law_residual), "residual"), p.tol_noncompliant, ">",
                std::abs(bad.first_law_residual) > p.tol_noncompliant};
        rep.checks.push_back(c);
    }
}

}  // namespace detail

// Runs a config. Throws ConfigError if validation finds problems, NumericalError (or any
// module exception) if the run itself fails.
inline RunReport run(const ExperimentConfig& cfg) {
    RunReport rep;
    rep.config = cfg;
    const auto problems = validate(cfg);
    if (!problems.empty()) {
        std::string msg = "config invalid:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw ConfigError(msg);
    }
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, CrossingParams>) detail::run_crossing(p, rep);
            else if constexpr (std::is_same_v<P, ChannelParams>) detail::run_channel(p, rep);
            else if constexpr (std::is_same_v<P, ProtocolParams>) detail::run_protocol_experiment(p, rep);
            else detail::run_laws(p, cfg.seed, rep);
        },
        cfg.params);
    return rep;
}

inline void write_outputs(const RunReport& rep, const std::filesystem::path& dir, double wall_seconds) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        out << text;
    };
    write("report.json", rep.to_json().dump(2) + "\n");
    write("metrics.csv", rep.metrics.csv());
    write("timing.json", json{{"wall_seconds", wall_seconds}}.dump(2) + "\n");
}

}  // namespace autoclock::experiment
