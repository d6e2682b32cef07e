// mixture.hpp: reduced u(x)b dynamics as a mixture of unitaries V(x, p, t), weighted by
// the clock position / weight momentum distribution mu(x, p).

#pragma once

#include "autoclock/clock/crossing.hpp"
#include "autoclock/core/parallel.hpp"

#include <functional>
#include <vector>

namespace autoclock::thermo {

struct KernelNode {
    double x{0.0};
    double p{0.0};
    double weight{0.0};
};

struct MixtureKernel {
    std::vector<KernelNode> nodes;
    std::function<Matrix(double x, double p, double t)> family;

    void validate() const {
        if (nodes.empty() || !family) throw std::invalid_argument("MixtureKernel: empty kernel");
        double total = 0.0;
        for (const auto& n : nodes) {
            if (n.weight < 0.0) throw std::invalid_argument("MixtureKernel: negative weight");
            total += n.weight;
        }
        if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("MixtureKernel: weights do not sum to 1");
    }
};

inline DensityMatrix mixture_reduced_dynamics(const DensityMatrix& rho_ub, const MixtureKernel& kernel, double t) {
    kernel.validate();
    std::vector<Matrix> terms(kernel.nodes.size());
    parallel_for(kernel.nodes.size(), [&](std::size_t i) {
        const auto& n = kernel.nodes[i];
        if (n.weight == 0.0) {
            terms[i] = Matrix::Zero(rho_ub.dim(), rho_ub.dim());
            return;
        }
        const Matrix v = kernel.family(n.x, n.p, t);
        if (v.rows() != rho_ub.dim() || !is_unitary(v, 1e-10))
            throw std::invalid_argument("mixture_reduced_dynamics: family member is not unitary");
        terms[i] = n.weight * (v * rho_ub.matrix() * v.adjoint());
    });
    Matrix out = Matrix::Zero(rho_ub.dim(), rho_ub.dim());
    for (const auto& t : terms) out += t;
    return DensityMatrix::normalized(out);
}

// Kernel of a clock crossing: one node per lattice site with weight <x|rho_c|x>, and
// V(x, t) = exp(-i H_e t) prod_s exp(-i G_s int_x^{x+t} f_s), later windows on the left.
inline MixtureKernel kernel_from_clock(const clock::ClockHamiltonian& h, const clock::ClockMixture& clock) {
    clock.validate();
    MixtureKernel k;
    const auto& grid = h.grid();
    for (Index j = 0; j < grid.points(); ++j) {
        double w = 0.0;
        for (std::size_t c = 0; c < clock.states.size(); ++c) w += clock.weights[c] * std::norm(clock.states[c].amplitudes()(j));
        if (w > 0.0) k.nodes.push_back({grid.position(j), 0.0, w});
    }
    double total = 0.0;
    for (const auto& n : k.nodes) total += n.weight;
    for (auto& n : k.nodes) n.weight /= total;
    const Matrix he = h.engine_hamiltonian();
    const auto segments = h.segments();
    k.family = [he, segments](double x, double, double t) {
        Matrix u = Matrix::Identity(he.rows(), he.cols());
        for (const auto& s : segments) u = unitary_from_hermitian(s.generator, s.window.integral(x, x + t)) * u;
        return Matrix(unitary_from_hermitian(he, t) * u);
    };
    return k;
}

}  // namespace autoclock::thermo
