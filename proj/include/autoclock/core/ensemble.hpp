// ensemble.hpp: mixed states held as weighted pure-state ensembles.
//
// Large spaces (the clock lattice) never get a dense density matrix; distances
// and spectra are evaluated in the span of the ensemble vectors, which is an
// exact isometric compression.

#pragma once

#include "autoclock/core/operator.hpp"

#include <stdexcept>
#include <vector>

namespace autoclock {

struct PureEnsemble {
    std::vector<double> weights;
    std::vector<Vector> states;

    void add(double w, Vector v) {
        if (w < 0.0) throw std::invalid_argument("PureEnsemble: negative weight");
        if (!states.empty() && v.size() != states.front().size())
            throw std::invalid_argument("PureEnsemble: state dimension mismatch");
        weights.push_back(w);
        states.push_back(std::move(v));
    }

    Index dim() const { return states.empty() ? 0 : states.front().size(); }
    std::size_t size() const { return states.size(); }

    Matrix dense() const {
        Matrix rho = Matrix::Zero(dim(), dim());
        for (std::size_t i = 0; i < size(); ++i) rho.noalias() += weights[i] * states[i] * states[i].adjoint();
        return rho;
    }
};

// Orthonormal columns spanning (at least) the columns of `vectors`.
inline Matrix orthonormal_span(const Matrix& vectors) {
    const Index r = std::min(vectors.rows(), vectors.cols());
    Eigen::HouseholderQR<Matrix> qr(vectors);
    return qr.householderQ() * Matrix::Identity(vectors.rows(), r);
}

inline Matrix stack_columns(std::initializer_list<const PureEnsemble*> ensembles) {
    Index n = 0, dim = -1;
    for (const auto* e : ensembles) {
        n += static_cast<Index>(e->size());
        if (e->size() && dim >= 0 && e->dim() != dim) throw std::invalid_argument("ensemble dimension mismatch");
        if (e->size()) dim = e->dim();
    }
    if (dim < 0) throw std::invalid_argument("empty ensembles");
    Matrix cols(dim, n);
    Index c = 0;
    for (const auto* e : ensembles)
        for (const auto& v : e->states) cols.col(c++) = v;
    return cols;
}

inline Matrix compress(const PureEnsemble& e, const Matrix& basis) {
    const Matrix b = basis.adjoint();
    Matrix rho = Matrix::Zero(basis.cols(), basis.cols());
    for (std::size_t i = 0; i < e.size(); ++i) {
        const Vector c = b * e.states[i];
        rho.noalias() += e.weights[i] * c * c.adjoint();
    }
    return rho;
}

inline double trace_norm_distance(const PureEnsemble& a, const PureEnsemble& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("trace_norm_distance: ensemble dimension mismatch");
    const Matrix q = orthonormal_span(stack_columns({&a, &b}));
    return trace_norm_hermitian(compress(a, q) - compress(b, q));
}

// Nonzero spectrum (descending) of an ensemble's density matrix.
inline RealVector ensemble_spectrum(const PureEnsemble& e) {
    const Matrix q = orthonormal_span(stack_columns({&e}));
    Eigen::SelfAdjointEigenSolver<Matrix> es(compress(e, q), Eigen::EigenvaluesOnly);
    RealVector v = es.eigenvalues().reverse();
    return v;
}

}  // namespace autoclock
