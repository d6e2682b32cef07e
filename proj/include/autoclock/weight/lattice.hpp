// lattice.hpp: finite cyclic weight used to cross-check the momentum picture.
//
// Weight positions x = 0..L-1 with H_w = X (one energy unit per site) and the cyclic
// shift S|x> = |x+1>. For integer system energies the engine unitary
//   U_e = sum_{n,j} <n|V|j> |n><j| (x) exp(i p0 D) S^D,  D = E_j - E_n,
// moves the weight up by exactly the energy the system releases. Away from the
// lattice edge it conserves H_s + H_w; on momentum eigenstates of S it acts as U_s(k).

#pragma once

#include "autoclock/weight/channel.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>

namespace autoclock::weight {

class CyclicWeightModel {
public:
    CyclicWeightModel(SystemSpec spec, Matrix v, double p0, Index sites = 32)
        : spec_(std::move(spec)), v_(std::move(v)), p0_(p0), sites_(sites) {
        if (sites_ < 4) throw std::invalid_argument("CyclicWeightModel: too few sites");
        if (v_.rows() != spec_.dim() || !is_unitary(v_)) throw std::invalid_argument("CyclicWeightModel: V must be unitary");
        for (Index k = 0; k < spec_.dim(); ++k) {
            const double e = spec_.energies()(k);
            if (std::abs(e - std::round(e)) > 1e-12)
                throw std::invalid_argument("CyclicWeightModel: system energies must be integers (commensurate with the lattice)");
            levels_.push_back(static_cast<long>(std::lround(e)));
        }
        v_energy_ = spec_.basis().adjoint() * v_ * spec_.basis();
    }

    Index sites() const { return sites_; }
    Index system_dim() const { return spec_.dim(); }
    long max_shift() const {
        return *std::max_element(levels_.begin(), levels_.end()) - *std::min_element(levels_.begin(), levels_.end());
    }

    RealVector weight_energies() const {
        RealVector x(sites_);
        for (Index k = 0; k < sites_; ++k) x(k) = static_cast<double>(k);
        return x;
    }

    // U_e (system (x) weight), for small checks only.
    Matrix dense_unitary() const {
        const Index d = spec_.dim();
        Matrix u_energy = Matrix::Zero(d * sites_, d * sites_);
        for (Index n = 0; n < d; ++n)
            for (Index j = 0; j < d; ++j) {
                const long shift = levels_[static_cast<std::size_t>(j)] - levels_[static_cast<std::size_t>(n)];
                const cplx c = v_energy_(n, j) * std::exp(cplx(0.0, p0_ * static_cast<double>(shift)));
                for (Index x = 0; x < sites_; ++x) u_energy(n * sites_ + wrap(x + shift), j * sites_ + x) += c;
            }
        const Matrix b = kron(spec_.basis(), Matrix::Identity(sites_, sites_));
        return b * u_energy * b.adjoint();
    }

    Matrix dense_hamiltonian() const {
        return kron(spec_.hamiltonian().matrix(), Matrix::Identity(sites_, sites_)) +
               kron(Matrix::Identity(spec_.dim(), spec_.dim()), weight_energies().cast<cplx>().asDiagonal().toDenseMatrix());
    }

    // Largest |[U_e, H_e]| matrix element over columns whose weight site is at least
    // `margin` away from both lattice edges. Zero when the shifts never wrap.
    double interior_energy_leakage(Index margin) const {
        const Matrix u = dense_unitary(), h = dense_hamiltonian();
        const Matrix c = u * h - h * u;
        double worst = 0.0;
        for (Index col = 0; col < c.cols(); ++col) {
            const Index x = col % sites_;
            if (x < margin || x >= sites_ - margin) continue;
            worst = std::max(worst, c.col(col).cwiseAbs().maxCoeff());
        }
        return worst;
    }

    // Joint pure state psi(a, x) = <a, x|U_e|phi, chi> in the original system basis.
    Matrix apply(const Vector& system, const Vector& weight) const {
        const Index d = spec_.dim();
        const Vector phi = spec_.basis().adjoint() * system;
        Matrix out = Matrix::Zero(d, sites_);
        for (Index n = 0; n < d; ++n)
            for (Index j = 0; j < d; ++j) {
                const long shift = levels_[static_cast<std::size_t>(j)] - levels_[static_cast<std::size_t>(n)];
                const cplx c = v_energy_(n, j) * phi(j) * std::exp(cplx(0.0, p0_ * static_cast<double>(shift)));
                if (c == 0.0) continue;
                for (Index x = 0; x < sites_; ++x) out(n, wrap(x + shift)) += c * weight(x);
            }
        return spec_.basis() * out;
    }

    // Weight wavefunction exp(i p0 x) exp(-(x-c)^2/(4 s^2)) on |x - c| <= half_width.
    Vector packet(double center, double sigma, double half_width) const {
        Vector w = Vector::Zero(sites_);
        for (Index x = 0; x < sites_; ++x) {
            const double d = static_cast<double>(x) - center;
            if (std::abs(d) <= half_width) w(x) = std::exp(cplx(-0.25 * d * d / (sigma * sigma), p0_ * static_cast<double>(x)));
        }
        return w / w.norm();
    }

    // Momentum distribution of a weight wavefunction on the lattice: |chi(k)|^2 at
    // k = 2 pi m / L, each k taken in the 2pi-window centred on p0 (U_s is 2pi-periodic in
    // k for integer energy gaps).
    WeightDistribution momentum_distribution(const Vector& weight) const {
        Eigen::FFT<double> fft;
        Vector spec(sites_);
        Vector w = weight;
        fft.fwd(spec, w);
        std::vector<WeightNode> nodes;
        double total = 0.0;
        for (Index m = 0; m < sites_; ++m) total += std::norm(spec(m));
        for (Index m = 0; m < sites_; ++m) {
            // FFT convention: spec(m) = sum_x w(x) e^{-2 pi i m x / L}; S acts as e^{-ik} on e^{ikx}.
            double k = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(sites_);
            k -= 2.0 * std::numbers::pi * std::round((k - p0_) / (2.0 * std::numbers::pi));
            nodes.push_back({k, std::norm(spec(m)) / total});
        }
        double s = 0.0;
        for (const auto& n : nodes) s += n.w;
        for (auto& n : nodes) n.w /= s;
        return WeightDistribution(std::move(nodes));
    }

    UnitaryFamily family() const { return UnitaryFamily(spec_, v_, p0_); }

private:
    Index wrap(long x) const {
        const long l = static_cast<long>(sites_);
        return static_cast<Index>(((x % l) + l) % l);
    }

    SystemSpec spec_;
    Matrix v_;
    Matrix v_energy_;
    double p0_;
    Index sites_;
    std::vector<long> levels_;
};

// Reduced states of a joint (system x weight) ensemble of pure runs.
struct LatticeMarginals {
    Matrix system;
    Matrix weight;
};

inline LatticeMarginals lattice_marginals(const std::vector<double>& weights, const std::vector<Matrix>& runs) {
    LatticeMarginals m{Matrix::Zero(runs.front().rows(), runs.front().rows()),
                       Matrix::Zero(runs.front().cols(), runs.front().cols())};
    for (std::size_t i = 0; i < runs.size(); ++i) {
        m.system.noalias() += weights[i] * runs[i] * runs[i].adjoint();
        m.weight.noalias() += weights[i] * runs[i].transpose() * runs[i].conjugate();
    }
    return m;
}

}  // namespace autoclock::weight
