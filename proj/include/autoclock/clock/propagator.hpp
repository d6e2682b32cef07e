// propagator.hpp: static engine+clock Hamiltonian on the lattice and its
// second-order split-step propagation.
//
// Joint pure states are stored as dim_e x n matrices psi(a, j): engine index a,
// clock lattice site j. The composite basis ordering is engine (x) clock.

#pragma once

#include "autoclock/clock/generator.hpp"
#include "autoclock/clock/grid.hpp"

#include <functional>
#include <string>
#include <vector>

namespace autoclock::clock {

inline Operator momentum_operator(const ClockGrid& grid) {
    const Index n = grid.points();
    Eigen::FFT<double> fft;
    Matrix p(n, n);
    Vector unit = Vector::Zero(n), spec(n), col(n);
    for (Index l = 0; l < n; ++l) {
        unit.setZero();
        unit(l) = 1.0;
        fft.fwd(spec, unit);
        for (Index j = 0; j < n; ++j) spec(j) *= grid.wavenumber(j);
        fft.inv(col, spec);
        p.col(l) = col;
    }
    return Operator::hermitian(0.5 * (p + p.adjoint()));
}

struct InteractionSegment {
    InteractionWindow window;
    Matrix generator;
    RealVector samples;  // f(x_j), sum_j f_j dx = 1
};

// H = H_e (x) 1 + 1 (x) P_c + sum_s sum_j f_s(x_j) G_s (x) |j><j|.
class ClockHamiltonian {
public:
    ClockHamiltonian(Matrix h_engine, ClockGrid grid, std::vector<InteractionSegment> segments, Interval clock_support)
        : h_(std::move(h_engine)), grid_(grid), segments_(std::move(segments)), support_(clock_support) {}

    const Matrix& engine_hamiltonian() const { return h_; }
    const ClockGrid& grid() const { return grid_; }
    const std::vector<InteractionSegment>& segments() const { return segments_; }
    const Interval& clock_support() const { return support_; }
    Index engine_dim() const { return h_.rows(); }

    double interaction_start() const { return segments_.empty() ? support_.hi : segments_.front().window.start(); }
    double interaction_end() const {
        double e = interaction_start();
        for (const auto& s : segments_) e = std::max(e, s.window.end());
        return e;
    }

    // tau = K + L: time after which the clock support has fully crossed every window.
    double crossing_time() const { return support_.length() + (interaction_end() - interaction_start()); }

    // Engine-side interaction operator at lattice site j.
    Matrix interaction_at(Index j) const {
        Matrix m = Matrix::Zero(engine_dim(), engine_dim());
        for (const auto& s : segments_)
            if (s.samples(j) != 0.0) m += s.samples(j) * s.generator;
        return m;
    }

    // Engine unitary implemented by a full crossing: later windows act after earlier ones.
    Matrix implemented_unitary() const {
        Matrix u = Matrix::Identity(engine_dim(), engine_dim());
        for (const auto& s : segments_) u = unitary_from_hermitian(s.generator, 1.0) * u;
        return u;
    }

    Matrix dense_interaction() const {
        const Index n = grid_.points(), d = engine_dim();
        Matrix m = Matrix::Zero(d * n, d * n);
        for (Index j = 0; j < n; ++j) {
            const Matrix v = interaction_at(j);
            for (Index a = 0; a < d; ++a)
                for (Index b = 0; b < d; ++b) m(a * n + j, b * n + j) = v(a, b);
        }
        return m;
    }

    // Full (dim_e * n)^2 matrix; only for small lattices.
    Matrix dense() const {
        const Index n = grid_.points(), d = engine_dim();
        return kron(h_, Matrix::Identity(n, n)) + kron(Matrix::Identity(d, d), momentum_operator(grid_).matrix()) +
               dense_interaction();
    }

private:
    Matrix h_;
    ClockGrid grid_;
    std::vector<InteractionSegment> segments_;
    Interval support_;
};

// Several windows, each with its own generator (which must commute with H_e).
inline ClockHamiltonian build_total_hamiltonian(const Operator& h_engine,
                                                const std::vector<std::pair<InteractionWindow, Operator>>& windows,
                                                const ClockGrid& grid, Interval clock_support) {
    if (!is_hermitian(h_engine.matrix())) throw std::invalid_argument("build_total_hamiltonian: H_e not Hermitian");
    std::vector<InteractionSegment> segs;
    for (const auto& [w, g] : windows) {
        if (g.dim() != h_engine.dim()) throw std::invalid_argument("build_total_hamiltonian: generator dimension mismatch");
        if (!is_hermitian(g.matrix())) throw std::invalid_argument("build_total_hamiltonian: generator not Hermitian");
        if (commutator_norm(g.matrix(), h_engine.matrix()) > 1e-10)
            throw std::invalid_argument("build_total_hamiltonian: generator does not commute with H_e");
        if (w.start() < clock_support.hi - 1e-12)
            throw std::invalid_argument("build_total_hamiltonian: interaction window overlaps the clock support");
        if (w.start() < grid.origin() || w.end() > grid.end())
            throw std::invalid_argument("build_total_hamiltonian: interaction window outside the clock lattice");
        segs.push_back({w, g.matrix(), w.sample(grid)});
    }
    std::sort(segs.begin(), segs.end(),
              [](const InteractionSegment& a, const InteractionSegment& b) { return a.window.start() < b.window.start(); });
    return ClockHamiltonian(h_engine.matrix(), grid, std::move(segs), clock_support);
}

inline ClockHamiltonian build_total_hamiltonian(const EngineSpec& spec, const InteractionWindow& window,
                                                const ClockGrid& grid, Interval clock_support) {
    return build_total_hamiltonian(spec.hamiltonian(), {{window, interaction_generator(spec).generator}}, grid,
                                   clock_support);
}

// ---------------------------------------------------------------------------

inline Matrix product_state(const Vector& engine, const Vector& clock) { return engine * clock.transpose(); }

inline Vector flatten(const Matrix& psi) {
    Vector v(psi.size());
    for (Index a = 0; a < psi.rows(); ++a) v.segment(a * psi.cols(), psi.cols()) = psi.row(a).transpose();
    return v;
}

inline double clock_momentum_expectation(const Matrix& psi, const ClockGrid& grid) {
    Eigen::FFT<double> fft;
    Vector row(psi.cols()), spec(psi.cols());
    double p = 0.0;
    for (Index a = 0; a < psi.rows(); ++a) {
        row = psi.row(a).transpose();
        fft.fwd(spec, row);
        for (Index j = 0; j < spec.size(); ++j) p += grid.wavenumber(j) * std::norm(spec(j));
    }
    return p / static_cast<double>(psi.cols());
}

inline double engine_energy_expectation(const Matrix& psi, const Matrix& h_engine) {
    return (psi.adjoint() * h_engine * psi).trace().real();
}

inline double interaction_expectation(const Matrix& psi, const ClockHamiltonian& h) {
    double e = 0.0;
    for (Index j = 0; j < psi.cols(); ++j) {
        const Matrix v = h.interaction_at(j);
        if (v.isZero(0.0)) continue;
        e += (psi.col(j).adjoint() * v * psi.col(j)).value().real();
    }
    return e;
}

// Strang splitting: half step of the site-diagonal part (H_e + sum_s f_s(x_j) G_s as
// dim_e x dim_e blocks), a full spectral step of P_c, another half diagonal step.
class StrangPropagator {
public:
    using Observer = std::function<void(std::size_t step, double time, const Matrix& psi)>;

    StrangPropagator(const ClockHamiltonian& h, double dt) : h_(&h), dt_(dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("propagate: dt must be positive");
        const Index n = h.grid().points();
        block_of_site_.assign(static_cast<std::size_t>(n), 0);
        blocks_.push_back(unitary_from_hermitian(h.engine_hamiltonian(), 0.5 * dt));
        for (Index j = 0; j < n; ++j) {
            const Matrix v = h.interaction_at(j);
            if (v.isZero(0.0)) continue;
            block_of_site_[static_cast<std::size_t>(j)] = blocks_.size();
            blocks_.push_back(unitary_from_hermitian(h.engine_hamiltonian() + v, 0.5 * dt));
        }
        kinetic_.resize(n);
        for (Index j = 0; j < n; ++j) kinetic_(j) = std::exp(cplx(0.0, -h.grid().wavenumber(j) * dt));
    }

    double dt() const { return dt_; }

    std::size_t steps_for(double t) const {
        if (t < 0.0) throw std::invalid_argument("propagate: t must be non-negative");
        const double ratio = t / dt_;
        const double rounded = std::round(ratio);
        if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
            throw std::invalid_argument("propagate: t/dt is not an integer");
        return static_cast<std::size_t>(rounded);
    }

    Matrix run(Matrix psi, double t, const Observer& observer = {}) const {
        check(psi);
        const std::size_t steps = steps_for(t);
        Eigen::FFT<double> fft;
        Vector row(psi.cols()), spec(psi.cols());
        if (observer) observer(0, 0.0, psi);
        for (std::size_t s = 0; s < steps; ++s) {
            half_diagonal(psi);
            for (Index a = 0; a < psi.rows(); ++a) {
                row = psi.row(a).transpose();
                fft.fwd(spec, row);
                spec.array() *= kinetic_.array();
                fft.inv(row, spec);
                psi.row(a) = row.transpose();
            }
            half_diagonal(psi);
            if (observer) observer(s + 1, static_cast<double>(s + 1) * dt_, psi);
        }
        return psi;
    }

private:
    void check(const Matrix& psi) const {
        if (psi.rows() != h_->engine_dim() || psi.cols() != h_->grid().points())
            throw std::invalid_argument("propagate: state shape does not match the Hamiltonian");
    }

    void half_diagonal(Matrix& psi) const {
        for (Index j = 0; j < psi.cols(); ++j) psi.col(j) = blocks_[block_of_site_[static_cast<std::size_t>(j)]] * psi.col(j);
    }

    const ClockHamiltonian* h_;
    double dt_;
    std::vector<Matrix> blocks_;
    std::vector<std::size_t> block_of_site_;
    Vector kinetic_;
};

inline Matrix propagate(const Matrix& psi, const ClockHamiltonian& h, double t, double dt) {
    return StrangPropagator(h, dt).run(psi, t);
}

}  // namespace autoclock::clock
