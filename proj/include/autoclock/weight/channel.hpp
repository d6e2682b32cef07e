// channel.hpp: system channel induced by a translation-invariant engine unitary
// and a weight with momentum distribution mu.
//
// U_e = sum_{n,j} <n|V|j> |n><j| (x) exp(-i (P_w - p0)(E_j - E_n)) commutes with
// P_w, so each weight momentum p sees the system unitary
//   U_s(p) = D(p) V~ D(p)^dagger,   D(p) = exp(i (p - p0) H_s),
// and the system marginal is the mixture sum_i w_i U_s(p_i) rho U_s(p_i)^dagger.

#pragma once

#include "autoclock/clock/generator.hpp"
#include "autoclock/core/parallel.hpp"
#include "autoclock/weight/distribution.hpp"

#include <vector>

namespace autoclock::weight {

class SystemSpec {
public:
    explicit SystemSpec(Operator h) : h_(std::move(h)) {
        if (!is_hermitian(h_.matrix())) throw std::invalid_argument("SystemSpec: H_s is not Hermitian");
        const auto e = eigh(h_.matrix());
        basis_ = e.vectors;
        energies_ = e.values;
        const double scale = std::max(1.0, energies_.cwiseAbs().maxCoeff());
        classes_ = clock::degenerate_blocks(energies_, 1e-9 * scale);
        // Pin each degeneracy class to one value so in-class differences are exactly zero.
        for (auto [b, end] : classes_) energies_.segment(b, end - b).setConstant(energies_.segment(b, end - b).mean());
        const Matrix rebuilt = basis_ * energies_.cast<cplx>().asDiagonal() * basis_.adjoint();
        if (max_abs(rebuilt - h_.matrix()) > 1e-12 * scale)
            throw std::runtime_error("SystemSpec: spectral decomposition does not reproduce H_s");
    }

    const Operator& hamiltonian() const { return h_; }
    Index dim() const { return h_.dim(); }
    const RealVector& energies() const { return energies_; }
    const Matrix& basis() const { return basis_; }
    const std::vector<std::pair<Index, Index>>& degeneracy_classes() const { return classes_; }

private:
    Operator h_;
    Matrix basis_;
    RealVector energies_;
    std::vector<std::pair<Index, Index>> classes_;
};

// p -> U_s(p); U_s(p0) = V exactly.
class UnitaryFamily {
public:
    UnitaryFamily(SystemSpec spec, Matrix v, double p0)
        : spec_(std::move(spec)), v_(std::move(v)), p0_(p0) {
        if (v_.rows() != spec_.dim() || !is_unitary(v_)) throw std::invalid_argument("build_U_s_of_p: V_s must be unitary of matching dimension");
        v_energy_ = spec_.basis().adjoint() * v_ * spec_.basis();
    }

    Matrix operator()(double p) const {
        const double s = p - p0_;
        if (s == 0.0) return v_;
        const RealVector& e = spec_.energies();
        Matrix m = v_energy_;
        for (Index n = 0; n < m.rows(); ++n)
            for (Index j = 0; j < m.cols(); ++j)
                if (e(j) != e(n)) m(n, j) *= std::exp(cplx(0.0, -s * (e(j) - e(n))));
        return spec_.basis() * m * spec_.basis().adjoint();
    }

    const SystemSpec& spec() const { return spec_; }
    const Matrix& target() const { return v_; }
    double p0() const { return p0_; }

private:
    SystemSpec spec_;
    Matrix v_;
    Matrix v_energy_;
    double p0_;
};

inline UnitaryFamily build_U_s_of_p(const SystemSpec& spec, const Operator& v, double p0) {
    return UnitaryFamily(spec, v.matrix(), p0);
}

struct ChannelReport {
    DensityMatrix output;
    double error{0.0};
    double p0{0.0};
    double width{0.0};
    std::size_t nodes{0};
};

// sum_i w_i U_s(p_i) rho U_s(p_i)^dagger, where U_s is evaluated with p0 taken from the
// family (the engine unitary) and nodes from mu. Summed in ascending node order.
inline DensityMatrix apply_weight_channel(const DensityMatrix& rho, const UnitaryFamily& family, const WeightDistribution& mu) {
    if (rho.dim() != family.spec().dim()) throw std::invalid_argument("apply_weight_channel: dimension mismatch");
    const auto& nodes = mu.nodes();
    std::vector<Matrix> terms(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) {
        const Matrix u = family(nodes[i].p);
        terms[i] = nodes[i].w * (u * rho.matrix() * u.adjoint());
    });
    Matrix out = Matrix::Zero(rho.dim(), rho.dim());
    for (const auto& t : terms) out += t;
    return DensityMatrix::normalized(out);
}

// Convenience form: family built with the distribution's own p0.
inline DensityMatrix apply_weight_channel(const DensityMatrix& rho, const SystemSpec& spec, const Operator& v,
                                          const WeightDistribution& mu) {
    return apply_weight_channel(rho, build_U_s_of_p(spec, v, mu.p0()), mu);
}

inline double channel_error(const DensityMatrix& rho, const SystemSpec& spec, const Operator& v, const WeightDistribution& mu) {
    const DensityMatrix out = apply_weight_channel(rho, spec, v, mu);
    return trace_norm_distance(out, conjugate(rho, v.matrix()));
}

inline ChannelReport channel_report(const DensityMatrix& rho, const SystemSpec& spec, const Operator& v, const WeightDistribution& mu) {
    ChannelReport r{apply_weight_channel(rho, spec, v, mu), 0.0, mu.p0(), mu.width(), mu.size()};
    r.error = trace_norm_distance(r.output, conjugate(rho, v.matrix()));
    return r;
}

// System state resolved by weight momentum: node i carries weight w_i and the
// system state conditioned on p_i. Momentum blocks never mix under U_e.
class MomentumResolvedState {
public:
    MomentumResolvedState(WeightDistribution mu, const DensityMatrix& rho)
        : mu_(std::move(mu)), conditional_(mu_.size(), rho.matrix()) {}

    void apply(const UnitaryFamily& family) {
        const auto& nodes = mu_.nodes();
        parallel_for(nodes.size(), [&](std::size_t i) {
            const Matrix u = family(nodes[i].p);
            conditional_[i] = u * conditional_[i] * u.adjoint();
        });
    }

    // Any per-node map (e.g. a composite protocol step).
    template <class Map>
    void apply_each(Map&& map) {
        const auto& nodes = mu_.nodes();
        parallel_for(nodes.size(), [&](std::size_t i) { conditional_[i] = map(nodes[i].p, conditional_[i]); });
    }

    DensityMatrix system() const {
        Matrix out = Matrix::Zero(conditional_.front().rows(), conditional_.front().cols());
        for (std::size_t i = 0; i < conditional_.size(); ++i) out += mu_.nodes()[i].w * conditional_[i];
        return DensityMatrix::normalized(out);
    }

    // Weight momentum marginal: probability of each node after the dynamics.
    RealVector momentum_marginal() const {
        RealVector m(static_cast<Index>(conditional_.size()));
        for (std::size_t i = 0; i < conditional_.size(); ++i)
            m(static_cast<Index>(i)) = mu_.nodes()[i].w * conditional_[i].trace().real();
        return m;
    }

    const WeightDistribution& distribution() const { return mu_; }
    const std::vector<Matrix>& conditional() const { return conditional_; }

private:
    WeightDistribution mu_;
    std::vector<Matrix> conditional_;
};

struct TranslationCheck {
    double offset_deviation{0.0};    // output change when nodes and p0 are shifted together
    double marginal_deviation{0.0};  // max |w_out - w_in| over nodes
    double two_pass_deviation{0.0};  // two passes on one weight vs exact V^2 (reported only)
};

inline TranslationCheck verify_translation_invariance(const DensityMatrix& rho, const SystemSpec& spec, const Operator& v,
                                                      const WeightDistribution& mu, double offset = 10.0) {
    TranslationCheck c;
    const DensityMatrix base = apply_weight_channel(rho, spec, v, mu);
    const DensityMatrix moved = apply_weight_channel(rho, spec, v, mu.shifted(offset));
    c.offset_deviation = trace_norm_distance(base, moved);

    MomentumResolvedState state(mu, rho);
    const UnitaryFamily family = build_U_s_of_p(spec, v, mu.p0());
    state.apply(family);
    c.marginal_deviation = (state.momentum_marginal() - mu.weights()).cwiseAbs().maxCoeff();
    state.apply(family);
    const Matrix v2 = v.matrix() * v.matrix();
    c.two_pass_deviation = trace_norm_distance(state.system(), conjugate(rho, v2));
    return c;
}

}  // namespace autoclock::weight
