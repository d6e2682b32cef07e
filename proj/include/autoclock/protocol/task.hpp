// task.hpp: state-transformation task, deterministic spectral data and the two
// rotation stages around the population staircase.

#pragma once

#include "autoclock/core/operator.hpp"

#include <cmath>
#include <stdexcept>

namespace autoclock::protocol {

struct TransformTask {
    Operator h_u;
    DensityMatrix rho_u0;
    DensityMatrix sigma_u;
    double T{1.0};
    double delta_p{1e-3};
    double eta{1e-8};

    void validate() const {
        const Index d = h_u.dim();
        if (!is_hermitian(h_u.matrix())) throw std::invalid_argument("TransformTask: H_u must be Hermitian");
        if (rho_u0.dim() != d || sigma_u.dim() != d) throw std::invalid_argument("TransformTask: state dimension mismatch");
        if (!(T > 0.0)) throw std::invalid_argument("TransformTask: temperature must be positive");
        if (!(delta_p > 0.0 && delta_p < 1.0)) throw std::invalid_argument("TransformTask: delta_p must lie in (0, 1)");
        if (!(eta > 0.0 && eta < 1.0 / static_cast<double>(d))) throw std::invalid_argument("TransformTask: eta must lie in (0, 1/d_u)");
    }
};

// Eigenpairs with probabilities descending; columns are the matching eigenvectors.
struct SpectralPairs {
    RealVector probs;
    Matrix vectors;
};

// Phase convention: the largest-magnitude component is real positive (first one on ties).
inline void fix_phase(Eigen::Ref<Vector> v) {
    Index best = 0;
    for (Index k = 1; k < v.size(); ++k)
        if (std::abs(v(k)) > std::abs(v(best)) + 1e-12) best = k;
    v *= std::conj(v(best)) / std::abs(v(best));
}

// Energy eigenbasis of H_u, ascending energies, phase-fixed.
inline Matrix energy_basis(const Operator& h) {
    Matrix b = eigh(h.matrix()).vectors;
    for (Index k = 0; k < b.cols(); ++k) fix_phase(b.col(k));
    return b;
}

// Eigen-decomposition with the tie-break: descending eigenvalue; inside a degenerate
// cluster, vectors are built by projecting the energy eigenvectors in ascending order
// onto the cluster and orthonormalizing (Gram-Schmidt); then the phase convention.
inline SpectralPairs spectral_pairs(const DensityMatrix& rho, const Operator& h, double tol = 1e-10) {
    const auto e = eigh(rho.matrix());
    const Index d = rho.dim();
    const Matrix energy = energy_basis(h);
    SpectralPairs out{RealVector(d), Matrix(d, d)};
    Index filled = 0;
    Index k = d;
    while (k > 0) {
        Index lo = k - 1;
        while (lo > 0 && e.values(k - 1) - e.values(lo - 1) <= tol) --lo;
        const Matrix cluster = e.vectors.middleCols(lo, k - lo);
        const Matrix proj = cluster * cluster.adjoint();
        const Index want = k - lo;
        Index got = 0;
        for (Index n = 0; n < d && got < want; ++n) {
            Vector v = proj * energy.col(n);
            for (Index c = filled; c < filled + got; ++c) v -= out.vectors.col(c).dot(v) * out.vectors.col(c);
            const double norm = v.norm();
            if (norm < 1e-8) continue;
            v /= norm;
            fix_phase(v);
            out.vectors.col(filled + got) = v;
            out.probs(filled + got) = std::max(0.0, e.values.segment(lo, want).mean());
            ++got;
        }
        if (got != want) throw std::runtime_error("spectral_pairs: could not complete a degenerate eigenspace");
        filled += want;
        k = lo;
    }
    return out;
}

// Floor the eigenvalues at eta and renormalize; eigenvectors unchanged.
inline DensityMatrix regularize_target(const DensityMatrix& sigma, double eta) {
    const Index d = sigma.dim();
    if (!(eta > 0.0 && eta < 1.0 / static_cast<double>(d))) throw std::invalid_argument("regularize_target: eta must lie in (0, 1/d)");
    const auto e = eigh(sigma.matrix());
    if (e.values.minCoeff() >= eta) return sigma;
    RealVector q = e.values.cwiseMax(eta);
    q /= q.sum();
    return DensityMatrix::normalized(e.vectors * q.cast<cplx>().asDiagonal() * e.vectors.adjoint());
}

// V1 = sum_n |E_n><psi_n| (acts on u).
inline Operator stage1(const TransformTask& task) {
    const SpectralPairs s = spectral_pairs(task.rho_u0, task.h_u);
    return Operator::unitary(energy_basis(task.h_u) * s.vectors.adjoint());
}

// V3 = sum_n |phi_n><E_n| for the regularized target.
inline Operator stage3(const TransformTask& task) {
    const SpectralPairs s = spectral_pairs(regularize_target(task.sigma_u, task.eta), task.h_u);
    return Operator::unitary(s.vectors * energy_basis(task.h_u).adjoint());
}

}  // namespace autoclock::protocol
