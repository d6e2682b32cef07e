#include "autoclock/core/random.hpp"
#include "autoclock/weight/lattice.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace autoclock;
using namespace autoclock::weight;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix hadamard() {
    Matrix m(2, 2);
    m << 1.0, 1.0, 1.0, -1.0;
    return m / std::sqrt(2.0);
}

Matrix permutation_matrix(const std::vector<int>& perm) {
    const auto d = static_cast<Index>(perm.size());
    Matrix m = Matrix::Zero(d, d);
    for (Index k = 0; k < d; ++k) m(perm[static_cast<std::size_t>(k)], k) = 1.0;
    return m;
}

// Continuous-p channel: integral of N(p; p0, sigma) U(p) rho U(p)^dagger by Simpson's rule,
// with U(p) = exp(i(p-p0)H) V exp(-i(p-p0)H) from dense exponentials.
Matrix continuous_channel(const Matrix& h, const Matrix& v, const Matrix& rho, double p0, double sigma) {
    auto integrand = [&](double p) {
        const Matrix d = oracle::expm_dense(h, -(p - p0));
        const Matrix u = d * v * d.adjoint();
        return Matrix(oracle::gaussian_pdf(p, p0, sigma) * (u * rho * u.adjoint()));
    };
    return oracle::simpson(integrand, p0 - 12.0 * sigma, p0 + 12.0 * sigma, 4000);
}

Vector flatten_rows(const Matrix& m) {
    Vector v(m.size());
    for (Index a = 0; a < m.rows(); ++a) v.segment(a * m.cols(), m.cols()) = m.row(a).transpose();
    return v;
}

}  // namespace

TEST(WeightDistribution, Invariants) {
    EXPECT_THROW(WeightDistribution({}), std::invalid_argument);
    EXPECT_THROW(WeightDistribution({{0.0, 0.5}, {1.0, 0.4}}), std::invalid_argument);
    EXPECT_THROW(WeightDistribution({{0.0, -0.5}, {1.0, 1.5}}), std::invalid_argument);
    EXPECT_THROW(WeightDistribution({{0.0, 0.5}, {1.0, 0.5}}, 0.7), std::invalid_argument);
    const WeightDistribution d({{1.0, 0.25}, {-1.0, 0.75}});
    EXPECT_NEAR(d.p0(), -0.5, 1e-15);
    EXPECT_DOUBLE_EQ(d.nodes().front().p, -1.0);
}

TEST(WeightDistribution, GaussHermiteMoments) {
    const WeightDistribution g = WeightDistribution::gaussian(3.0, 0.5);
    EXPECT_NEAR(g.weights().sum(), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(g.p0(), 3.0);
    EXPECT_NEAR(g.width(), 0.5, 1e-7);  // tails beyond 6 sigma are dropped
    for (const auto& n : g.nodes()) EXPECT_LE(std::abs(n.p - 3.0), 6.0 * 0.5 + 1e-12);
    // Characteristic function E[exp(i s (p - p0))] = exp(-s^2 sigma^2 / 2).
    for (double s : {0.5, 1.0, 2.0}) {
        cplx acc = 0.0;
        for (const auto& n : g.nodes()) acc += n.w * std::exp(cplx(0.0, s * (n.p - 3.0)));
        EXPECT_NEAR(std::abs(acc - std::exp(-0.125 * s * s)), 0.0, 1e-8);
    }
}

TEST(RescaleDistribution, Examples) {
    const WeightDistribution two({{1.0, 0.5}, {3.0, 0.5}});
    const WeightDistribution same = rescale_distribution(two, 1.0);
    EXPECT_DOUBLE_EQ(same.nodes()[0].p, 1.0);
    EXPECT_DOUBLE_EQ(same.nodes()[1].p, 3.0);
    const WeightDistribution half = rescale_distribution(two, 0.5);
    EXPECT_DOUBLE_EQ(half.nodes()[0].p, 1.5);
    EXPECT_DOUBLE_EQ(half.nodes()[1].p, 2.5);
    EXPECT_DOUBLE_EQ(half.p0(), 2.0);
    EXPECT_NEAR(half.weights().sum(), 1.0, 1e-15);
    EXPECT_THROW(rescale_distribution(two, 0.0), std::invalid_argument);
    EXPECT_THROW(rescale_distribution(two, -0.1), std::invalid_argument);
}

TEST(UnitaryFamily, Examples) {
    const SystemSpec spec(Operator::diagonal({0.0, 1.0}));
    const UnitaryFamily f = build_U_s_of_p(spec, Operator::unitary(hadamard()), 0.7);
    EXPECT_EQ(f(0.7), hadamard());

    // p - p0 = pi: entry (n, j) picks up exp(-i pi (E_j - E_n)) = -1 off the diagonal.
    Matrix expected = hadamard();
    expected(0, 1) *= std::exp(cplx(0.0, -kPi));
    expected(1, 0) *= std::exp(cplx(0.0, kPi));
    const Matrix u = f(0.7 + kPi);
    EXPECT_LT(max_abs(u - expected), 1e-14);
    EXPECT_TRUE(is_unitary(u));

    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = std::exp(cplx(0.0, 0.3));
    diag(1, 1) = std::exp(cplx(0.0, -1.1));
    const UnitaryFamily g = build_U_s_of_p(spec, Operator::unitary(diag), 0.0);
    for (double p : {-5.0, 0.1, 2.0}) EXPECT_LT(max_abs(g(p) - diag), 1e-15);
    EXPECT_THROW(build_U_s_of_p(spec, Operator(Matrix::Identity(2, 2) * 2.0), 0.0), std::invalid_argument);
}

TEST(UnitaryFamily, MatchesConjugationOracleWithDegeneracy) {
    RandomSource rng(3);
    const Matrix basis = rng.unitary(3);
    const RealVector e = (RealVector(3) << 0.0, 1.5, 1.5).finished();
    const Matrix h = basis * e.cast<cplx>().asDiagonal() * basis.adjoint();
    const Matrix hh = 0.5 * (h + h.adjoint());
    const Matrix v = rng.unitary(3);
    const UnitaryFamily f(SystemSpec(Operator::hermitian(hh)), v, 0.2);
    for (double p : {-2.0, 0.2, 0.9, 4.0}) {
        const Matrix d = oracle::expm_dense(hh, -(p - 0.2));
        EXPECT_LT(max_abs(f(p) - d * v * d.adjoint()), 1e-12);
        EXPECT_TRUE(is_unitary(f(p)));
    }
}

TEST(ApplyWeightChannel, Examples) {
    RandomSource rng(5);
    const SystemSpec spec(Operator::diagonal({0.0, 1.0}));
    const DensityMatrix rho = rng.density(2);
    const Operator h = Operator::unitary(hadamard());
    const DensityMatrix exact = apply_weight_channel(rho, spec, h, WeightDistribution::delta(2.0));
    EXPECT_LT(max_abs(exact.matrix() - hadamard() * rho.matrix() * hadamard().adjoint()), 1e-14);

    const WeightDistribution broad = WeightDistribution::gaussian(0.0, 3.0);
    EXPECT_LT(trace_norm_distance(apply_weight_channel(rho, spec, Operator::identity(2), broad), rho), 1e-14);

    // Two nodes p0 +- pi, explicit two-term sum.
    const DensityMatrix zero = DensityMatrix::basis(2, 0);
    const WeightDistribution two({{1.0 - kPi, 0.5}, {1.0 + kPi, 0.5}});
    const DensityMatrix out = apply_weight_channel(zero, spec, h, two);
    const UnitaryFamily f = build_U_s_of_p(spec, h, 1.0);
    const Matrix u1 = f(1.0 - kPi), u2 = f(1.0 + kPi);
    const Matrix brute = 0.5 * (u1 * zero.matrix() * u1.adjoint() + u2 * zero.matrix() * u2.adjoint());
    EXPECT_LT(max_abs(out.matrix() - brute), 1e-14);
    // |0> -> (|0> - |1>)/sqrt2 at both nodes: a pure state, the target is |+>.
    EXPECT_NEAR(trace_norm_distance(out, DensityMatrix::pure((Vector(2) << 1.0, 1.0).finished())), 2.0, 1e-12);
}

TEST(ChannelError, HadamardMatchesContinuousOracle) {
    const SystemSpec spec(Operator::diagonal({0.0, 1.0}));
    const Operator h = Operator::unitary(hadamard());
    const DensityMatrix zero = DensityMatrix::basis(2, 0);
    const Matrix target = hadamard() * zero.matrix() * hadamard().adjoint();
    std::vector<double> errors;
    for (double sigma : {0.5, 0.25}) {
        const double oracle_error = oracle::trace_norm(continuous_channel(spec.hamiltonian().matrix(), hadamard(), zero.matrix(), 0.0, sigma) - target);
        const double e = channel_error(zero, spec, h, WeightDistribution::gaussian(0.0, sigma));
        EXPECT_NEAR(e, oracle_error, 1e-8);
        errors.push_back(e);
    }
    EXPECT_NEAR(errors[0], 0.1175030974154046, 1e-8);
    EXPECT_NEAR(errors[1], 0.0307667655236348, 1e-8);
    EXPECT_NEAR(errors[0] / errors[1], 3.819, 0.25 * 3.819);
}

TEST(ChannelError, ConvergesUnderRescaling) {
    const SystemSpec spec(Operator::diagonal({0.0, 1.0}));
    const WeightDistribution mu = WeightDistribution::gaussian(0.0, 1.0);
    double prev = 10.0;
    for (int k = 0; k <= 8; ++k) {
        const double e = channel_error(DensityMatrix::basis(2, 0), spec, Operator::unitary(hadamard()),
                                       rescale_distribution(mu, std::ldexp(1.0, -k)));
        EXPECT_LT(e, prev);
        prev = e;
    }
    EXPECT_LE(prev, 1e-3);
}

TEST(ChannelError, PermutationsAreExactOnDiagonalStates) {
    RandomSource rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = rng.integer(2, 5);
        RealVector levels(d);
        for (int k = 0; k < d; ++k) levels(k) = rng.uniform(-3.0, 3.0);
        const SystemSpec spec(Operator::diagonal(levels));
        const Operator perm = Operator::unitary(permutation_matrix(rng.permutation(d)));
        const DensityMatrix rho = DensityMatrix::diagonal(rng.distribution(d));
        const WeightDistribution mu = WeightDistribution::gaussian(rng.uniform(-5.0, 5.0), rng.uniform(1.0, 20.0));
        EXPECT_LE(channel_error(rho, spec, perm, mu), 1e-12);
    }
    EXPECT_LE(channel_error(DensityMatrix::basis(2, 0), SystemSpec(Operator::diagonal({0.0, 1.0})),
                            Operator::unitary(hadamard()), WeightDistribution::delta(0.0)),
              1e-12);
}

TEST(TranslationInvariance, OffsetAndMarginal) {
    RandomSource rng(17);
    const SystemSpec spec(Operator::hermitian(rng.hermitian(3)));
    const Operator v = Operator::unitary(rng.unitary(3));
    const DensityMatrix rho = rng.density(3);
    const TranslationCheck c = verify_translation_invariance(rho, spec, v, WeightDistribution::gaussian(0.4, 0.8));
    EXPECT_LE(c.offset_deviation, 1e-12);
    EXPECT_LE(c.marginal_deviation, 1e-12);
    EXPECT_GT(c.two_pass_deviation, 1e-6);  // generic V: reported, not exact
}

TEST(MomentumResolvedState, MarginalIsCatalytic) {
    RandomSource rng(19);
    const SystemSpec spec(Operator::diagonal({0.0, 0.6, 1.7}));
    const UnitaryFamily f(spec, rng.unitary(3), 0.0);
    const WeightDistribution mu = WeightDistribution::gaussian(0.0, 0.3);
    MomentumResolvedState state(mu, rng.density(3));
    for (int k = 0; k < 10; ++k) state.apply(f);
    EXPECT_LE((state.momentum_marginal() - mu.weights()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CyclicWeightModel, ConservesEnergyAwayFromTheEdge) {
    RandomSource rng(23);
    const SystemSpec spec(Operator::diagonal({0.0, 1.0, 2.0}));
    const CyclicWeightModel model(spec, rng.unitary(3), 0.3);
    const Matrix u = model.dense_unitary();
    EXPECT_TRUE(is_unitary(u));
    EXPECT_LE(model.interior_energy_leakage(model.max_shift()), 1e-12);
    EXPECT_GT(model.interior_energy_leakage(0), 1e-3);  // the wrap does not conserve X_w
    EXPECT_THROW(CyclicWeightModel(SystemSpec(Operator::diagonal({0.0, 0.5})), Matrix::Identity(2, 2), 0.0),
                 std::invalid_argument);
}

TEST(CyclicWeightModel, ShiftIsLiteralDisplacement) {
    // Permutation |0> <-> |2> with levels (0, 1, 2): dropping two units raises the weight by 2 sites.
    const SystemSpec spec(Operator::diagonal({0.0, 1.0, 2.0}));
    const CyclicWeightModel model(spec, permutation_matrix({2, 1, 0}), 0.0);
    Vector chi = Vector::Zero(32);
    chi(10) = 1.0;
    const Matrix out = model.apply(Vector::Unit(3, 2), chi);
    EXPECT_NEAR(std::abs(out(0, 12)), 1.0, 1e-15);
}

TEST(CyclicWeightModel, MomentumMixtureIsExact) {
    RandomSource rng(29);
    const SystemSpec spec(Operator::diagonal({0.0, 1.0, 1.0, 2.0}));
    const Matrix v = rng.unitary(4);
    const CyclicWeightModel model(spec, v, 0.9);
    const Vector chi = model.packet(16.0, 1.5, 8.0);
    const Vector phi = rng.state_vector(4);
    const Matrix joint = model.apply(phi, chi);
    const Matrix dense = model.dense_unitary() * kron(phi, chi);
    EXPECT_LT((flatten_rows(joint) - dense.col(0)).cwiseAbs().maxCoeff(), 1e-12);
    const auto marg = lattice_marginals({1.0}, {joint});
    const DensityMatrix mixture = apply_weight_channel(DensityMatrix::pure(phi), model.family(), model.momentum_distribution(chi));
    EXPECT_LT(max_abs(marg.system - mixture.matrix()), 1e-12);
}
