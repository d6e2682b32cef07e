// crossing.hpp: crossing experiments: engine, clock and product errors after the
// clock has traversed the interaction region.

#pragma once

#include "autoclock/clock/propagator.hpp"
#include "autoclock/core/ensemble.hpp"
#include "autoclock/core/parallel.hpp"

#include <vector>

namespace autoclock::clock {

struct CrossingSetup {
    ClockHamiltonian hamiltonian;
    ClockMixture clock;
    DensityMatrix engine_state;
    double dt{1.0 / 64.0};
};

// Evolved joint pure components (dim_e x n each) with their mixture weights.
struct JointEnsemble {
    std::vector<double> weights;
    std::vector<Matrix> states;
};

struct CrossingReport {
    double time{0.0};
    double crossing_time{0.0};
    double engine_error{0.0};
    double clock_error{0.0};
    double product_error{0.0};
    DensityMatrix engine_state;
    RealVector initial_clock_spectrum;
    RealVector final_clock_spectrum;
};

// Product decomposition of the initial state into pure joint runs.
inline JointEnsemble initial_components(const CrossingSetup& s) {
    s.clock.validate();
    if (s.engine_state.dim() != s.hamiltonian.engine_dim())
        throw std::invalid_argument("crossing: engine state dimension mismatch");
    const auto e = eigh(s.engine_state.matrix());
    JointEnsemble out;
    for (Index k = e.values.size(); k-- > 0;) {
        if (e.values(k) <= 1e-14) continue;
        for (std::size_t c = 0; c < s.clock.states.size(); ++c) {
            out.weights.push_back(e.values(k) * s.clock.weights[c]);
            out.states.push_back(product_state(e.vectors.col(k), s.clock.states[c].amplitudes()));
        }
    }
    return out;
}

inline JointEnsemble evolve_components(const CrossingSetup& s, double t) {
    JointEnsemble out = initial_components(s);
    const StrangPropagator prop(s.hamiltonian, s.dt);
    prop.steps_for(t);
    parallel_for(out.states.size(), [&](std::size_t i) { out.states[i] = prop.run(out.states[i], t); });
    return out;
}

inline Matrix reduced_engine(const JointEnsemble& j) {
    const Index d = j.states.front().rows();
    Matrix rho = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < j.states.size(); ++i) rho.noalias() += j.weights[i] * j.states[i] * j.states[i].adjoint();
    return rho;
}

// Reduced clock state as an (unnormalized-vector) ensemble: rows of each component.
inline PureEnsemble reduced_clock(const JointEnsemble& j) {
    PureEnsemble e;
    for (std::size_t i = 0; i < j.states.size(); ++i)
        for (Index a = 0; a < j.states[i].rows(); ++a) e.add(j.weights[i], j.states[i].row(a).transpose());
    return e;
}

// || rho_joint - rho_e (x) rho_c ||_1 evaluated in the span of the clock vectors.
inline double product_error(const JointEnsemble& j) {
    const Index d = j.states.front().rows();
    const PureEnsemble clock = reduced_clock(j);
    const Matrix q = orthonormal_span(stack_columns({&clock}));
    const Index r = q.cols();
    Matrix joint = Matrix::Zero(d * r, d * r), rho_e = Matrix::Zero(d, d), rho_c = Matrix::Zero(r, r);
    for (std::size_t i = 0; i < j.states.size(); ++i) {
        const Matrix c = j.states[i] * q.conjugate();
        const Vector v = flatten(c);
        joint.noalias() += j.weights[i] * v * v.adjoint();
        rho_e.noalias() += j.weights[i] * c * c.adjoint();
        rho_c.noalias() += j.weights[i] * c.transpose() * c.conjugate();
    }
    return trace_norm_hermitian(joint - kron(rho_e, rho_c));
}

inline PureEnsemble translated_clock(const ClockMixture& m, double t) {
    PureEnsemble e;
    for (std::size_t c = 0; c < m.states.size(); ++c)
        e.add(m.weights[c], translate(m.states[c].amplitudes(), m.grid(), t));
    return e;
}

// Target engine state exp(-i H_e t) U rho U^dagger exp(i H_e t).
inline Matrix target_engine_state(const CrossingSetup& s, double t) {
    const Matrix u = unitary_from_hermitian(s.hamiltonian.engine_hamiltonian(), t) * s.hamiltonian.implemented_unitary();
    return u * s.engine_state.matrix() * u.adjoint();
}

// Problems that would void the crossing argument; empty when the setup is sound.
inline std::vector<std::string> crossing_diagnostics(const CrossingSetup& s, double t) {
    std::vector<std::string> out;
    const auto& grid = s.hamiltonian.grid();
    const Interval support = s.clock.support();
    for (const auto& seg : s.hamiltonian.segments())
        if (seg.window.start() < support.hi - 1e-12)
            out.emplace_back("interaction window overlaps the initial clock support (clock must start inside a known interval left of the window)");
    if (support.lo < grid.origin() || support.hi + t >= grid.end())
        out.emplace_back("clock support would wrap around the periodic lattice before time t; the periodic clock needs period > clock travel");
    return out;
}

inline CrossingReport simulate_crossing(const CrossingSetup& s, double t) {
    for (const auto& d : crossing_diagnostics(s, t)) throw std::invalid_argument("crossing: " + d);
    const JointEnsemble evolved = evolve_components(s, t);

    CrossingReport r;
    r.time = t;
    r.crossing_time = s.hamiltonian.crossing_time();
    const Matrix rho_e = reduced_engine(evolved);
    r.engine_state = DensityMatrix::normalized(rho_e);
    r.engine_error = trace_norm_hermitian(rho_e - target_engine_state(s, t));

    const PureEnsemble clock_now = reduced_clock(evolved);
    r.clock_error = trace_norm_distance(clock_now, translated_clock(s.clock, t));
    r.product_error = product_error(evolved);

    PureEnsemble clock0;
    for (std::size_t c = 0; c < s.clock.states.size(); ++c) clock0.add(s.clock.weights[c], s.clock.states[c].amplitudes());
    r.initial_clock_spectrum = ensemble_spectrum(clock0);
    r.final_clock_spectrum = ensemble_spectrum(clock_now);
    return r;
}

// Same as simulate_crossing, restricted to t > tau where the clock has fully crossed.
inline CrossingReport crossing_report(const CrossingSetup& s, double t) {
    if (!(t > s.hamiltonian.crossing_time()))
        throw std::invalid_argument("crossing_report: t must exceed the crossing time tau = K + L");
    return simulate_crossing(s, t);
}

// Largest eigenvalue mismatch between two spectra (zero-padded, descending).
inline double spectrum_mismatch(const RealVector& a, const RealVector& b) {
    const Index n = std::max(a.size(), b.size());
    double m = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double x = i < a.size() ? a(i) : 0.0, y = i < b.size() ? b(i) : 0.0;
        m = std::max(m, std::abs(x - y));
    }
    return m;
}

}  // namespace autoclock::clock
