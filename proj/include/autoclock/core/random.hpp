// random.hpp: seeded random operators for scenario generation and property tests.

#pragma once

#include "autoclock/core/operator.hpp"

#include <cstdint>
#include <random>

namespace autoclock {

class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    std::mt19937_64& engine() { return eng_; }

    Matrix ginibre(Index rows, Index cols) {
        Matrix m(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) m(i, j) = cplx(normal(), normal());
        return m;
    }

    Vector state_vector(Index dim) {
        Vector v = ginibre(dim, 1).col(0);
        return v / v.norm();
    }

    Matrix hermitian(Index dim) {
        const Matrix g = ginibre(dim, dim);
        return 0.5 * (g + g.adjoint());
    }

    // Haar-random unitary: QR of a Ginibre matrix with the R-diagonal phases removed.
    Matrix unitary(Index dim) {
        const Matrix g = ginibre(dim, dim);
        Eigen::HouseholderQR<Matrix> qr(g);
        Matrix q = qr.householderQ();
        const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Index k = 0; k < dim; ++k) {
            const cplx d = r(k, k);
            q.col(k) *= d / std::abs(d);
        }
        return q;
    }

    DensityMatrix density(Index dim, Index rank = -1) {
        if (rank <= 0) rank = dim;
        const Matrix g = ginibre(dim, rank);
        const Matrix m = g * g.adjoint();
        return DensityMatrix::normalized(m / m.trace().real());
    }

    // Uniform point on the probability simplex.
    RealVector distribution(Index dim) {
        RealVector p(dim);
        for (Index i = 0; i < dim; ++i) p(i) = -std::log(uniform(1e-12, 1.0));
        return p / p.sum();
    }

    std::vector<int> permutation(int n) {
        std::vector<int> p(static_cast<std::size_t>(n));
        std::iota(p.begin(), p.end(), 0);
        std::shuffle(p.begin(), p.end(), eng_);
        return p;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace autoclock
