// generator.hpp: Hermitian generator G with exp(-iG) = U_e for energy-conserving targets.

#pragma once

#include "autoclock/core/operator.hpp"

#include <Eigen/Eigenvalues>

#include <numbers>
#include <string>
#include <vector>

namespace autoclock::clock {

// Engine Hamiltonian plus a target unitary that commutes with it.
class EngineSpec {
public:
    EngineSpec(Operator hamiltonian, Operator target) : h_(std::move(hamiltonian)), u_(std::move(target)) {
        if (!is_hermitian(h_.matrix())) throw std::invalid_argument("EngineSpec: engine Hamiltonian is not Hermitian");
        if (!is_unitary(u_.matrix())) throw std::invalid_argument("EngineSpec: target is not unitary");
        if (h_.dim() != u_.dim()) throw std::invalid_argument("EngineSpec: dimension mismatch");
        if (commutator_norm(h_.matrix(), u_.matrix()) > 1e-10)
            throw std::invalid_argument("EngineSpec: target does not commute with the engine Hamiltonian");
    }

    const Operator& hamiltonian() const { return h_; }
    const Operator& target() const { return u_; }
    Index dim() const { return h_.dim(); }

private:
    Operator h_;
    Operator u_;
};

struct GeneratorResult {
    Operator generator;
    bool branch_ambiguous{false};
    std::vector<std::string> warnings;
};

// Groups of (nearly) equal ascending eigenvalues: [begin, end) index ranges.
inline std::vector<std::pair<Index, Index>> degenerate_blocks(const RealVector& ascending, double tol) {
    std::vector<std::pair<Index, Index>> blocks;
    Index begin = 0;
    for (Index k = 1; k <= ascending.size(); ++k) {
        if (k == ascending.size() || ascending(k) - ascending(k - 1) > tol) {
            blocks.emplace_back(begin, k);
            begin = k;
        }
    }
    return blocks;
}

// Generator eigenvalue g with exp(-ig) = lambda, g in (-pi, pi]; lambda = -1 maps to +pi.
inline double generator_phase(cplx lambda, bool& ambiguous) {
    if (std::abs(lambda + 1.0) <= 1e-10) {
        ambiguous = true;
        return std::numbers::pi;
    }
    double g = -std::arg(lambda);
    if (g <= -std::numbers::pi) g += 2.0 * std::numbers::pi;
    return g;
}

// Principal log of a unitary that commutes with `h`, computed block-wise in the
// eigenspaces of h so that the result commutes with h as well.
inline GeneratorResult commuting_generator(const Matrix& h, const Matrix& u) {
    const auto e = eigh(h);
    const double scale = std::max(1.0, e.values.cwiseAbs().maxCoeff());
    GeneratorResult out;
    Matrix g = Matrix::Zero(h.rows(), h.cols());
    for (auto [b, end] : degenerate_blocks(e.values, 1e-9 * scale)) {
        const Matrix basis = e.vectors.middleCols(b, end - b);
        const Matrix block = basis.adjoint() * u * basis;
        Eigen::ComplexSchur<Matrix> schur(block);
        const Matrix& t = schur.matrixT();
        const Matrix z = basis * schur.matrixU();
        RealVector phases(t.rows());
        for (Index k = 0; k < t.rows(); ++k) phases(k) = generator_phase(t(k, k), out.branch_ambiguous);
        g += z * phases.cast<cplx>().asDiagonal() * z.adjoint();
    }
    g = 0.5 * (g + g.adjoint());
    if (out.branch_ambiguous)
        out.warnings.emplace_back("target has eigenvalue -1; logarithm branch resolved to generator eigenvalue +pi");
    if (max_abs(unitary_from_hermitian(g, 1.0) - u) > 1e-10)
        throw std::runtime_error("commuting_generator: exp(-iG) does not reproduce the target");
    out.generator = Operator::hermitian(std::move(g));
    return out;
}

inline GeneratorResult interaction_generator(const EngineSpec& spec) {
    return commuting_generator(spec.hamiltonian().matrix(), spec.target().matrix());
}

}  // namespace autoclock::clock
