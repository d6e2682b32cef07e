#include "autoclock/experiment/runner.hpp"

#include <gtest/gtest.h>

using namespace autoclock;
using namespace autoclock::experiment;

namespace {

bool mentions(const std::vector<std::string>& diags, const std::string& needle) {
    for (const auto& d : diags)
        if (d.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST(Config, PresetsAreValid) {
    for (const char* kind : {"crossing", "channel", "protocol", "laws"}) {
        const ExperimentConfig cfg = parse_config(json{{"experiment", kind}});
        EXPECT_TRUE(validate(cfg).empty()) << kind;
    }
}

TEST(Config, UnknownFieldsRejected) {
    EXPECT_THROW(parse_config(json{{"experiment", "crossing"}, {"colour", "red"}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"experiment", "crossing"}, {"parameters", {{"window", {{"width", 3}}}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"experiment", "laws"}, {"tolerances", {{"engine_error", 1e-3}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"experiment", "channel"}, {"parameters", {{"target", "cnot"}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"experiment", "sorting"}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"experiment", "laws"}}, ExperimentKind::crossing), ConfigError);
    EXPECT_THROW(parse_config(json{{"experiment", "laws"}, {"parameters", {{"scenarios", "many"}}}}), ConfigError);
}

TEST(Config, DenseMatrices) {
    const json doc = {{"experiment", "crossing"},
                      {"parameters",
                       {{"hamiltonian", {{{0.0, 0.0}, {0.0, 0.0}}, {{0.0, 0.0}, {2.0, 0.0}}}},
                        {"target", {{{1.0, 0.0}, {0.0, 0.0}}, {{0.0, 0.0}, {0.0, 1.0}}}}}}};
    const ExperimentConfig cfg = parse_config(doc);
    const auto& p = std::get<CrossingParams>(cfg.params);
    ASSERT_TRUE(p.hamiltonian.dense);
    EXPECT_EQ((*p.hamiltonian.dense)(1, 1), cplx(2.0, 0.0));
    EXPECT_EQ((*p.target.dense)(1, 1), cplx(0.0, 1.0));
    EXPECT_TRUE(validate(cfg).empty());
    EXPECT_THROW(parse_config(json{{"experiment", "crossing"}, {"parameters", {{"hamiltonian", {{1.0, 0.0}}}}}}), ConfigError);
}

TEST(Validate, WindowOverlapAndWrapAround) {
    const auto overlap = validate(parse_config(json{{"experiment", "crossing"}, {"parameters", {{"window", {{"start", -1.0}}}}}}));
    EXPECT_TRUE(mentions(overlap, "clock-independence assumption"));
    const auto wrap = validate(parse_config(json{{"experiment", "crossing"}, {"parameters", {{"grid", {{"period", 32.0}}}}}}));
    EXPECT_TRUE(mentions(wrap, "wraps around"));
    const auto swap = validate(parse_config(json{{"experiment", "crossing"}, {"parameters", {{"target", "swap"}}}}));
    EXPECT_TRUE(mentions(swap, "does not commute"));
}

TEST(Validate, ProtocolRanges) {
    const auto bad = validate(parse_config(json{{"experiment", "protocol"}, {"parameters", {{"delta_p", {0.1, 1.5}}, {"temperature", -1.0}}}}));
    EXPECT_TRUE(mentions(bad, "delta_p out of range"));
    EXPECT_TRUE(mentions(bad, "temperature"));
    EXPECT_THROW(run(parse_config(json{{"experiment", "protocol"}, {"parameters", {{"delta_p", {0.0}}}}})), ConfigError);
}

TEST(Run, CrossingIdentityPasses) {
    const RunReport r = run(parse_config(json{{"experiment", "crossing"}}));
    EXPECT_TRUE(r.pass());
    ASSERT_EQ(r.metrics.rows.size(), 1u);
    EXPECT_LE(r.metrics.rows[0][2], 1e-3);
}

TEST(Run, ChannelSweepDecreases) {
    const RunReport r = run(parse_config(json{{"experiment", "channel"}}));
    EXPECT_TRUE(r.pass());
    ASSERT_EQ(r.metrics.rows.size(), 9u);
    for (std::size_t k = 1; k < r.metrics.rows.size(); ++k) EXPECT_LT(r.metrics.rows[k][1], r.metrics.rows[k - 1][1]);
    EXPECT_EQ(r.metrics.csv().substr(0, 12), "delta,error\n");
}

TEST(Run, ProtocolExtractionMeetsExpectedWork) {
    const RunReport r = run(parse_config(json{{"experiment", "protocol"}, {"parameters", {{"expected_work", 1.3132616875182228}}}}));
    EXPECT_TRUE(r.pass());
    EXPECT_NEAR(r.runs.back()["ledger"]["W"].get<double>(), 1.3132616875182228, 1e-2);
}

TEST(Run, ToleranceFailureIsReported) {
    const RunReport r = run(parse_config(json{{"experiment", "protocol"}, {"parameters", {{"expected_work", 2.0}}}}));
    EXPECT_FALSE(r.pass());
}

TEST(Run, LawsReportIsDeterministic) {
    const json doc = {{"experiment", "laws"}, {"seed", 9}, {"parameters", {{"scenarios", 12}}}};
    const RunReport a = run(parse_config(doc));
    const RunReport b = run(parse_config(doc));
    EXPECT_TRUE(a.pass());
    EXPECT_EQ(a.to_json().dump(2), b.to_json().dump(2));
    EXPECT_EQ(a.metrics.csv(), b.metrics.csv());
    EXPECT_EQ(a.metrics.columns,
              (std::vector<std::string>{"scenario_id", "dU", "W", "Q", "dF_u", "first_law_residual", "second_law_margin", "entropy_delta"}));
    ExperimentConfig other = parse_config(doc);
    other.seed = 10;
    EXPECT_NE(run(other).metrics.csv(), a.metrics.csv());
    EXPECT_EQ(a.to_json()["version"], kVersion);
    EXPECT_FALSE(a.to_json().contains("wall_seconds"));
}
