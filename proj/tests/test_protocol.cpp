#include "autoclock/core/random.hpp"
#include "autoclock/protocol/run.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace autoclock;
using namespace autoclock::protocol;

namespace {

const Operator kQubitH = Operator::diagonal({0.0, 1.0});

TransformTask qubit_task(const DensityMatrix& rho0, const DensityMatrix& sigma, double dp, double T = 1.0) {
    return TransformTask{kQubitH, rho0, sigma, T, dp, 1e-8};
}

// Brute-force stage two on a diagonal qubit: explicit u (x) b swaps, bath energies -T ln r.
struct OracleStageTwo {
    double work{0.0};
    double heat{0.0};
};

OracleStageTwo oracle_stage_two(RealVector a, const RealVector& q, double dp, double T) {
    const double span = (a.cwiseMax(1e-8) / a.cwiseMax(1e-8).sum() - q).cwiseAbs().maxCoeff();
    const int m = static_cast<int>(std::ceil(span / dp - 1e-9));
    const RealVector p = a.cwiseMax(1e-8) / a.cwiseMax(1e-8).sum();
    Matrix swap = Matrix::Zero(4, 4);
    swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 1.0;
    Matrix rho = a.cast<cplx>().asDiagonal();
    OracleStageTwo out;
    for (int j = 1; j <= m; ++j) {
        const RealVector r = j == m ? q : RealVector(p + (q - p) * (static_cast<double>(j) / m));
        const RealVector e{{-T * std::log(r(0)) + T * std::log(r.maxCoeff()), -T * std::log(r(1)) + T * std::log(r.maxCoeff())}};
        const Matrix joint = swap * kron(rho, Matrix(r.cast<cplx>().asDiagonal())) * swap;
        const Matrix b = oracle::trace_out_first(joint, 2, 2);
        out.heat += (b.diagonal().real() - r).dot(e);
        const Matrix next = oracle::trace_out_second(joint, 2, 2);
        out.work -= (next - rho).diagonal().real().dot(RealVector{{0.0, 1.0}}) + (b.diagonal().real() - r).dot(e);
        rho = next;
    }
    return out;
}

}  // namespace

TEST(Staircase, WorkedExample) {
    const auto steps = build_staircase(RealVector{{0.9, 0.1}}, RealVector{{0.5, 0.5}}, 0.1);
    ASSERT_EQ(steps.size(), 4u);
    EXPECT_NEAR(steps[0].r(0), 0.8, 1e-15);
    EXPECT_NEAR(steps[0].r(1), 0.2, 1e-15);
    EXPECT_NEAR(steps[3].r(0), 0.5, 1e-15);
    EXPECT_NEAR(steps[0].energies(1) - steps[0].energies(0), std::log(4.0), 1e-14);
    EXPECT_THROW(build_staircase(RealVector{{1.0, 0.0}}, RealVector{{0.5, 0.5}}, 0.1), std::invalid_argument);
}

TEST(Staircase, PerStepBoundsAndEntropy) {
    RandomSource rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Index d = rng.integer(2, 4);
        RealVector p(d), q(d);
        for (Index k = 0; k < d; ++k) p(k) = rng.uniform(0.05, 1.0), q(k) = rng.uniform(0.05, 1.0);
        p /= p.sum();
        q /= q.sum();
        const double T = rng.uniform(0.3, 3.0);
        const double dp = rng.uniform(0.005, 0.1);
        RealVector e_u(d);
        for (Index k = 0; k < d; ++k) e_u(k) = static_cast<double>(k);
        const auto s2 = stage2_execute(p, e_u, build_staircase(p, q, dp, T), T);
        EXPECT_LT((s2.populations - q).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_NEAR(s2.delta_S_u + s2.delta_S_b, 0.0, 1e-12);
        for (const auto& st : s2.steps) {
            EXPECT_GE(st.delta_F_b, -1e-14);
            EXPECT_LE(st.delta_F_b, T * st.chi_square + 1e-14);
            EXPECT_LE(st.delta_F_b, T * st.r.cwiseInverse().sum() * dp * dp + 1e-14);
        }
    }
}

TEST(Stages, PlusStateRotatesToGround) {
    Vector plus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const TransformTask task = qubit_task(DensityMatrix::pure(plus), DensityMatrix::maximally_mixed(2), 0.1);
    const Matrix rotated = stage1(task).matrix() * task.rho_u0.matrix() * stage1(task).matrix().adjoint();
    EXPECT_NEAR(rotated(0, 0).real(), 1.0, 1e-14);
    EXPECT_LT(max_abs(rotated - DensityMatrix::basis(2, 0).matrix()), 1e-14);
}

TEST(Stages, DegenerateSpectrumIsDeterministic) {
    const Operator h = Operator::diagonal({0.0, 1.0, 2.0});
    const SpectralPairs s = spectral_pairs(DensityMatrix::maximally_mixed(3), h);
    EXPECT_LT(max_abs(s.vectors - Matrix::Identity(3, 3)), 1e-14);
    const TransformTask task{h, DensityMatrix::maximally_mixed(3), DensityMatrix::maximally_mixed(3), 1.0, 0.01, 1e-8};
    EXPECT_LT(max_abs(stage1(task).matrix() - Matrix::Identity(3, 3)), 1e-14);
}

TEST(Protocol, IdentityTask) {
    const DensityMatrix g = thermal_state(kQubitH, 1.0);
    const ProtocolReport r = run_protocol(qubit_task(g, g, 0.01));
    EXPECT_EQ(r.steps, 0u);
    EXPECT_LT(r.error, 1e-14);
    EXPECT_NEAR(r.ledger.W, 0.0, 1e-14);
}

TEST(Protocol, ExcitedToGibbsMatchesOracle) {
    const DensityMatrix excited = DensityMatrix::basis(2, 1);
    const DensityMatrix g = thermal_state(kQubitH, 1.0);
    const double drop = 1.0 + std::log(1.0 + std::exp(-1.0));  // F(excited) - F(Gibbs)
    EXPECT_NEAR(drop, 1.3132616875182228, 1e-15);
    double previous_gap = 1e9;
    for (double dp : {0.1, 0.05, 0.01, 0.002}) {
        const ProtocolReport r = run_protocol(qubit_task(excited, g, dp));
        const OracleStageTwo o = oracle_stage_two(RealVector{{1.0, 0.0}}, RealVector{{g(0, 0).real(), g(1, 1).real()}}, dp, 1.0);
        EXPECT_NEAR(r.ledger.W, 1.0 + o.work, 1e-12) << dp;  // stage one extracts the unit gap
        EXPECT_NEAR(r.ledger.Q, o.heat, 1e-12);
        EXPECT_LT(r.error, 1e-12);
        EXPECT_NEAR(r.free_energy_drop, drop, 1e-12);
        EXPECT_NEAR(std::abs(r.first_law_residual), 0.0, 1e-14);
        EXPECT_GE(r.gap, -1e-12);
        EXPECT_LE(r.gap, 10.0 * dp);
        EXPECT_LE(r.gap, r.epsilon_prime);
        EXPECT_LT(r.gap, previous_gap);
        previous_gap = r.gap;
    }
}

TEST(Protocol, LandauerErasure) {
    const DensityMatrix mixed = DensityMatrix::maximally_mixed(2);
    const DensityMatrix ground = DensityMatrix::basis(2, 0);
    const double bound = 0.5 - std::log(2.0);  // -(F(mixed) - F(ground)) for unit gap, T = 1
    for (double dp : {0.05, 0.01, 0.002}) {
        const ProtocolReport r = run_protocol(qubit_task(mixed, ground, dp));
        EXPECT_NEAR(r.free_energy_drop, bound, 1e-6);
        EXPECT_LE(r.ledger.W, bound + 1e-6);
        EXPECT_LE(r.gap, 10.0 * dp * r.max_bath_energy);
        EXPECT_LT(r.error, 3e-8);
        EXPECT_LT(r.error_vs_regularized, 1e-12);
    }
    EXPECT_NEAR(run_protocol(qubit_task(mixed, ground, 0.0005)).ledger.W, bound, 0.02);
}

TEST(Protocol, RandomTasksReachRegularizedTarget) {
    RandomSource rng(12);
    for (int trial = 0; trial < 15; ++trial) {
        const Index d = rng.integer(2, 4);
        RealVector levels(d);
        for (Index k = 0; k < d; ++k) levels(k) = rng.uniform(0.0, 2.0);
        const TransformTask task{Operator::diagonal(levels), rng.density(d), rng.density(d, rng.integer(1, static_cast<int>(d))),
                                 rng.uniform(0.3, 3.0), 0.02, 1e-8};
        const ProtocolReport r = run_protocol(task);
        EXPECT_LT(r.error_vs_regularized, 1e-10);
        EXPECT_LT(r.error, 1e-6);
        EXPECT_NEAR(r.first_law_residual, 0.0, 1e-12);
        EXPECT_GE(r.second_law_margin, -1e-12);
        EXPECT_GE(r.margin, -1e-12);
        EXPECT_NEAR(r.ledger.delta_S_u + r.ledger.delta_S_b, 0.0, 1e-10);
    }
}

TEST(Protocol, TimeOffsetIsCompensated) {
    RandomSource rng(13);
    const TransformTask task = qubit_task(rng.density(2), rng.density(2), 0.05);
    ProtocolOptions opt;
    opt.time_offset = 3.7;
    EXPECT_LT(trace_norm_distance(run_protocol(task, opt).final_state, run_protocol(task).final_state), 1e-12);
}

TEST(Protocol, DiagonalTaskIsExactForBroadWeight) {
    const Operator h = Operator::diagonal({0.0, 0.7, 1.9});
    const TransformTask task{h, DensityMatrix::diagonal(RealVector{{0.2, 0.5, 0.3}}), thermal_state(h, 0.8), 0.8, 0.05, 1e-8};
    ProtocolOptions opt;
    opt.weight = weight::WeightDistribution::gaussian(0.4, 2.0);
    const ProtocolReport broad = run_protocol(task, opt);
    const ProtocolReport exact = run_protocol(task);
    EXPECT_EQ(broad.path, "weight-nodes");
    EXPECT_LT(trace_norm_distance(broad.final_state, exact.final_state), 1e-12);
    EXPECT_NEAR(broad.ledger.W, exact.ledger.W, 1e-12);
    EXPECT_NEAR(broad.ledger.delta_S_b, exact.ledger.delta_S_b, 1e-10);
}

TEST(Protocol, CoherentTargetDegradesWithWidthAndRecoversWithRescale) {
    Vector plus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const TransformTask task = qubit_task(DensityMatrix::basis(2, 1), DensityMatrix::pure(plus), 0.05);
    ProtocolOptions opt;
    opt.weight = weight::WeightDistribution::gaussian(0.0, 0.5);
    const double wide = run_protocol(task, opt).error;
    opt.weight = rescale_distribution(*opt.weight, 0.1);
    const double narrow = run_protocol(task, opt).error;
    EXPECT_GT(wide, 0.05);
    EXPECT_LT(narrow, wide / 10.0);
}

TEST(Protocol, CatalysisLeavesMomentumMarginal) {
    RandomSource rng(14);
    const TransformTask task = qubit_task(rng.density(2), rng.density(2), 0.1);
    const auto mu = weight::WeightDistribution::gaussian(0.3, 0.4);
    const auto marginals = catalysis_marginals(task, mu, 10);
    ASSERT_EQ(marginals.size(), 11u);
    for (const auto& m : marginals) EXPECT_LT((m - mu.weights()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Protocol, ClockPathMatchesExact) {
    RandomSource rng(15);
    const TransformTask task = qubit_task(rng.density(2), thermal_state(kQubitH, 1.0), 0.9);
    ProtocolOptions opt;
    opt.clock = ClockPathOptions{};
    opt.time_offset = opt.clock->time;
    const ProtocolReport clocked = run_protocol(task, opt);
    const ProtocolReport exact = run_protocol(task);
    EXPECT_EQ(clocked.path, "clock");
    EXPECT_EQ(clocked.steps, 1u);
    EXPECT_LE(trace_norm_distance(clocked.final_state, exact.final_state), 2e-3);
    EXPECT_NEAR(clocked.ledger.W, exact.ledger.W, 2e-3);
}

TEST(Protocol, ClockPathRejectsLargeEngines) {
    const TransformTask task = qubit_task(DensityMatrix::basis(2, 1), thermal_state(kQubitH, 1.0), 0.05);
    ProtocolOptions opt;
    opt.clock = ClockPathOptions{};
    EXPECT_THROW(run_protocol(task, opt), std::invalid_argument);
}
