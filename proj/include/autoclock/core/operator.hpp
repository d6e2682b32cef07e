// operator.hpp: finite-dimensional operator algebra: operators, density matrices,
// composite layouts, spectral functions, distances and entropies.
//
// Units throughout the library: hbar = k_B = 1.
// The trace distance is the UNHALVED trace norm ||a - b||_1 (range [0, 2]).

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace autoclock {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPositivityTol = 1e-12;

// ------------------------------- predicates ---------------------------------

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_square(const Matrix& m) { return m.rows() == m.cols() && m.rows() > 0; }

inline bool is_hermitian(const Matrix& m, double tol = kHermitianTol) {
    return is_square(m) && max_abs(m - m.adjoint()) <= tol;
}

inline bool is_unitary(const Matrix& m, double tol = kUnitaryTol) {
    return is_square(m) && max_abs(m.adjoint() * m - Matrix::Identity(m.rows(), m.cols())) <= tol;
}

inline bool is_diagonal(const Matrix& m, double tol = 0.0) {
    if (!is_square(m)) return false;
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            if (i != j && std::abs(m(i, j)) > tol) return false;
    return true;
}

inline double commutator_norm(const Matrix& a, const Matrix& b) {
    return max_abs(a * b - b * a);
}

// ------------------------------- Operator -----------------------------------

struct Structure {
    bool hermitian{false};
    bool unitary{false};
    bool diagonal{false};
};

// Dense square operator with declared structure. Declared flags are checked on
// construction (hermitian: 1e-12 entrywise, unitary: 1e-10 entrywise).
class Operator {
public:
    Operator() = default;

    explicit Operator(Matrix m, Structure s = {}) : m_(std::move(m)), s_(s) {
        if (!is_square(m_)) throw std::invalid_argument("Operator: matrix must be square and non-empty");
        if (s_.hermitian && !is_hermitian(m_)) throw std::invalid_argument("Operator: declared hermitian but A != A^dagger");
        if (s_.unitary && !is_unitary(m_)) throw std::invalid_argument("Operator: declared unitary but A^dagger A != 1");
        if (s_.diagonal && !is_diagonal(m_)) throw std::invalid_argument("Operator: declared diagonal but has off-diagonal entries");
    }

    static Operator hermitian(Matrix m) { return Operator(std::move(m), {.hermitian = true}); }
    static Operator unitary(Matrix m) { return Operator(std::move(m), {.unitary = true}); }

    static Operator identity(Index dim) {
        return Operator(Matrix::Identity(dim, dim), {.hermitian = true, .unitary = true, .diagonal = true});
    }

    static Operator diagonal(const RealVector& d) {
        return Operator(d.cast<cplx>().asDiagonal().toDenseMatrix(), {.hermitian = true, .diagonal = true});
    }

    static Operator diagonal(std::initializer_list<double> d) {
        return diagonal(RealVector(Eigen::Map<const RealVector>(d.begin(), static_cast<Index>(d.size()))));
    }

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    const Structure& structure() const { return s_; }
    cplx operator()(Index i, Index j) const { return m_(i, j); }

private:
    Matrix m_;
    Structure s_;
};

// ------------------------------- DensityMatrix ------------------------------

class DensityMatrix {
public:
    DensityMatrix() = default;

    // Validates: Hermitian (1e-12), unit trace (1e-12), min eigenvalue >= -1e-12.
    explicit DensityMatrix(Matrix m) : m_(std::move(m)) {
        if (!is_square(m_)) throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
        if (!is_hermitian(m_)) throw std::invalid_argument("DensityMatrix: not Hermitian");
        if (std::abs(m_.trace() - cplx(1.0)) > kTraceTol) throw std::invalid_argument("DensityMatrix: trace != 1");
        Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -kPositivityTol) throw std::invalid_argument("DensityMatrix: not positive semidefinite");
    }

    // Symmetrizes and rescales to unit trace before validating; for results of
    // long numerical pipelines whose trace has drifted at roundoff level.
    static DensityMatrix normalized(const Matrix& m) {
        Matrix h = 0.5 * (m + m.adjoint());
        const double tr = h.trace().real();
        if (!(tr > 0.0)) throw std::invalid_argument("DensityMatrix::normalized: non-positive trace");
        return DensityMatrix(h / tr);
    }

    static DensityMatrix pure(const Vector& psi) {
        const double n = psi.norm();
        if (n == 0.0) throw std::invalid_argument("DensityMatrix::pure: zero vector");
        const Vector v = psi / n;
        return normalized(v * v.adjoint());
    }

    static DensityMatrix basis(Index dim, Index k) {
        Vector v = Vector::Zero(dim);
        v(k) = 1.0;
        return pure(v);
    }

    static DensityMatrix maximally_mixed(Index dim) {
        return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
    }

    static DensityMatrix diagonal(const RealVector& p) {
        return normalized(p.cast<cplx>().asDiagonal().toDenseMatrix());
    }

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    cplx operator()(Index i, Index j) const { return m_(i, j); }

private:
    Matrix m_;
};

// ------------------------------- SubsystemLayout ----------------------------

// Ordered tensor factors of a composite space, e.g. {{"u",2},{"b",2},{"w",32}}.
// Basis index ordering is row-major: the first factor is the most significant.
class SubsystemLayout {
public:
    struct Factor {
        std::string label;
        Index dim;
    };

    SubsystemLayout() = default;

    SubsystemLayout(std::initializer_list<Factor> factors) : SubsystemLayout(std::vector<Factor>(factors)) {}

    explicit SubsystemLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) throw std::invalid_argument("SubsystemLayout: no factors");
        std::set<std::string> seen;
        for (const auto& f : factors_) {
            if (f.dim <= 0) throw std::invalid_argument("SubsystemLayout: factor '" + f.label + "' has non-positive dimension");
            if (!seen.insert(f.label).second) throw std::invalid_argument("SubsystemLayout: duplicate label '" + f.label + "'");
        }
    }

    const std::vector<Factor>& factors() const { return factors_; }
    std::size_t size() const { return factors_.size(); }

    Index total_dim() const {
        return std::accumulate(factors_.begin(), factors_.end(), Index{1},
                               [](Index acc, const Factor& f) { return acc * f.dim; });
    }

    bool contains(const std::string& label) const {
        return std::any_of(factors_.begin(), factors_.end(), [&](const Factor& f) { return f.label == label; });
    }

    std::size_t position(const std::string& label) const {
        for (std::size_t i = 0; i < factors_.size(); ++i)
            if (factors_[i].label == label) return i;
        throw std::invalid_argument("SubsystemLayout: unknown label '" + label + "'");
    }

    Index dim_of(const std::string& label) const { return factors_[position(label)].dim; }

private:
    std::vector<Factor> factors_;
};

// ------------------------------- tensor products ----------------------------

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out = Eigen::kroneckerProduct(a, b).eval();
    return out;
}

inline Operator tensor(const Operator& a, const Operator& b) {
    const auto& sa = a.structure();
    const auto& sb = b.structure();
    return Operator(kron(a.matrix(), b.matrix()),
                    {.hermitian = sa.hermitian && sb.hermitian,
                     .unitary = sa.unitary && sb.unitary,
                     .diagonal = sa.diagonal && sb.diagonal});
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    return DensityMatrix::normalized(kron(a.matrix(), b.matrix()));
}

// ------------------------------- partial trace ------------------------------

// Raw partial trace on matrices; keeps factors in layout order. Linear in rho.
inline Matrix partial_trace(const Matrix& rho, const SubsystemLayout& layout, const std::set<std::string>& keep) {
    if (rho.rows() != layout.total_dim() || rho.cols() != layout.total_dim())
        throw std::invalid_argument("partial_trace: matrix dimension does not match layout");
    if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
    for (const auto& k : keep)
        if (!layout.contains(k)) throw std::invalid_argument("partial_trace: unknown label '" + k + "'");

    const auto& fs = layout.factors();
    const std::size_t nf = fs.size();
    std::vector<Index> stride(nf);
    {
        Index s = 1;
        for (std::size_t i = nf; i-- > 0;) {
            stride[i] = s;
            s *= fs[i].dim;
        }
    }
    std::vector<std::size_t> kept, traced;
    for (std::size_t i = 0; i < nf; ++i) (keep.count(fs[i].label) ? kept : traced).push_back(i);

    auto offsets = [&](const std::vector<std::size_t>& idx) {
        Index total = 1;
        for (auto i : idx) total *= fs[i].dim;
        std::vector<Index> off(static_cast<std::size_t>(total));
        for (Index n = 0; n < total; ++n) {
            Index rem = n, o = 0;
            for (std::size_t k = idx.size(); k-- > 0;) {
                const Index d = fs[idx[k]].dim;
                o += (rem % d) * stride[idx[k]];
                rem /= d;
            }
            off[static_cast<std::size_t>(n)] = o;
        }
        return off;
    };
    const auto ko = offsets(kept);
    const auto to = offsets(traced);
    const auto dk = static_cast<Index>(ko.size());

    Matrix out = Matrix::Zero(dk, dk);
    for (Index a = 0; a < dk; ++a)
        for (Index b = 0; b < dk; ++b) {
            cplx acc{0.0};
            for (Index t : to) acc += rho(ko[static_cast<std::size_t>(a)] + t, ko[static_cast<std::size_t>(b)] + t);
            out(a, b) = acc;
        }
    return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const SubsystemLayout& layout, const std::set<std::string>& keep) {
    return DensityMatrix::normalized(partial_trace(rho.matrix(), layout, keep));
}

// ------------------------------- spectral functions -------------------------

struct HermitianEigen {
    RealVector values;  // ascending
    Matrix vectors;     // columns
};

inline HermitianEigen eigh(const Matrix& h) {
    if (!is_square(h)) throw std::invalid_argument("eigh: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
    if (es.info() != Eigen::Success) throw std::runtime_error("eigh: decomposition failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

// exp(-i H t) for Hermitian H.
inline Matrix unitary_from_hermitian(const Matrix& h, double t) {
    if (!is_hermitian(h)) throw std::invalid_argument("unitary_from_hermitian: H is not Hermitian");
    const auto e = eigh(h);
    Vector phases(e.values.size());
    for (Index k = 0; k < e.values.size(); ++k) phases(k) = std::exp(cplx(0.0, -e.values(k) * t));
    return e.vectors * phases.asDiagonal() * e.vectors.adjoint();
}

inline DensityMatrix evolve(const DensityMatrix& rho, const Operator& h, double t) {
    if (rho.dim() != h.dim()) throw std::invalid_argument("evolve: dimension mismatch");
    if (!is_hermitian(h.matrix())) throw std::invalid_argument("evolve: H is not Hermitian");
    const Matrix u = unitary_from_hermitian(h.matrix(), t);
    return DensityMatrix::normalized(u * rho.matrix() * u.adjoint());
}

inline DensityMatrix conjugate(const DensityMatrix& rho, const Matrix& u) {
    if (u.rows() != rho.dim() || u.cols() != rho.dim()) throw std::invalid_argument("conjugate: dimension mismatch");
    return DensityMatrix::normalized(u * rho.matrix() * u.adjoint());
}

// Sum of |eigenvalues| of a Hermitian matrix (= sum of singular values).
inline double trace_norm_hermitian(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

inline double trace_norm_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("trace_norm_distance: dimension mismatch");
    return trace_norm_hermitian(a.matrix() - b.matrix());
}

inline double entropy_of_spectrum(const RealVector& lambda) {
    double s = 0.0;
    for (Index i = 0; i < lambda.size(); ++i) {
        const double l = lambda(i) < 0.0 ? 0.0 : lambda(i);
        if (l > 0.0) s -= l * std::log(l);
    }
    return s;
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
    return entropy_of_spectrum(es.eigenvalues());
}

inline double expectation(const Operator& h, const DensityMatrix& rho) {
    if (h.dim() != rho.dim()) throw std::invalid_argument("expectation: dimension mismatch");
    return (h.matrix() * rho.matrix()).trace().real();
}

inline DensityMatrix thermal_state(const Operator& h, double temperature) {
    if (!(temperature > 0.0)) throw std::invalid_argument("thermal_state: temperature must be positive");
    if (!is_hermitian(h.matrix())) throw std::invalid_argument("thermal_state: H is not Hermitian");
    const auto e = eigh(h.matrix());
    const double e0 = e.values.minCoeff();
    RealVector w = (-(e.values.array() - e0) / temperature).exp();
    w /= w.sum();
    return DensityMatrix::normalized(e.vectors * w.cast<cplx>().asDiagonal() * e.vectors.adjoint());
}

inline double free_energy(const DensityMatrix& rho, const Operator& h, double temperature) {
    if (rho.dim() != h.dim()) throw std::invalid_argument("free_energy: dimension mismatch");
    return expectation(h, rho) - temperature * von_neumann_entropy(rho);
}

}  // namespace autoclock
