// run.hpp: the full three-stage protocol executed as an engine unitary, with an exact
// weight, a weight momentum distribution, or through the clock crossing.

#pragma once

#include "autoclock/clock/crossing.hpp"
#include "autoclock/core/parallel.hpp"
#include "autoclock/protocol/staircase.hpp"
#include "autoclock/protocol/task.hpp"
#include "autoclock/thermo/ledger.hpp"
#include "autoclock/weight/channel.hpp"

#include <optional>
#include <string>
#include <vector>

namespace autoclock::protocol {

struct ClockPathOptions {
    clock::ClockGrid grid{};
    clock::Interval support{-8.0, 0.0};
    double window_start{0.0};
    double window_length{8.0};
    clock::Profile profile{clock::Profile::gaussian};
    double dt{1.0 / 64.0};
    double time{24.0};
};

struct ProtocolOptions {
    std::optional<weight::WeightDistribution> weight;  // empty: exact (delta) weight
    std::optional<double> time_offset;                  // pre-compensated free evolution after the protocol
    std::optional<ClockPathOptions> clock;
};

struct ProtocolReport {
    DensityMatrix final_state;
    DensityMatrix regularized_target;
    double error{0.0};                   // vs sigma_u
    double error_vs_regularized{0.0};    // vs the rank-floored target
    thermo::ThermoLedger ledger;
    double first_law_residual{0.0};
    double second_law_margin{0.0};
    std::size_t steps{0};
    double free_energy_drop{0.0};  // -dF_u
    double gap{0.0};               // -dF_u - W
    double epsilon_prime{0.0};
    double margin{0.0};  // W - (-dF_u - epsilon')
    double max_bath_energy{0.0};
    double rank_floor_term{0.0};
    double gibbs_step_constant{0.0};  // C with 0 <= dF_b(step) <= C dp^2
    double min_step_delta_F_b{0.0};
    double max_step_delta_F_b{0.0};
    std::vector<StaircaseStep> staircase;
    RealVector momentum_marginal;
    std::string path;
    std::vector<std::string> warnings;
};

namespace detail {

inline RealVector floor_and_normalize(const RealVector& p, double eta) {
    RealVector r = p.cwiseMax(eta);
    return r / r.sum();
}

// Shared preparation: stage unitaries, populations after stage 1 and the staircase.
struct Plan {
    Matrix energy;  // energy eigenbasis of H_u (columns)
    RealVector e_u;
    Matrix v1;
    Matrix v3;
    Matrix v4;  // exp(i H_u t') or identity
    RealVector a0;  // energy populations after stage 1
    RealVector q;   // regularized target spectrum (descending)
    DensityMatrix target_reg;
    std::vector<StaircaseStep> steps;
};

inline Plan make_plan(const TransformTask& task, const ProtocolOptions& opt) {
    task.validate();
    Plan p{energy_basis(task.h_u), eigh(task.h_u.matrix()).values, stage1(task).matrix(), stage3(task).matrix(),
           Matrix::Identity(task.h_u.dim(), task.h_u.dim()), {}, {}, regularize_target(task.sigma_u, task.eta), {}};
    if (opt.time_offset) p.v4 = unitary_from_hermitian(task.h_u.matrix(), -*opt.time_offset);
    const Matrix rho1 = p.energy.adjoint() * p.v1 * task.rho_u0.matrix() * p.v1.adjoint() * p.energy;
    p.a0 = energy_populations(rho1, 1e-9).cwiseMax(0.0);
    p.a0 /= p.a0.sum();
    p.q = spectral_pairs(p.target_reg, task.h_u).probs;
    p.steps = build_staircase(floor_and_normalize(p.a0, task.eta), p.q, task.delta_p, task.T);
    return p;
}

inline Matrix after_offset(const TransformTask& task, const ProtocolOptions& opt, const Matrix& rho) {
    if (!opt.time_offset) return rho;
    const Matrix u = unitary_from_hermitian(task.h_u.matrix(), *opt.time_offset);
    return u * rho * u.adjoint();
}

// SWAP between u (energy basis) and a d-level bath qudit, in u's original basis.
inline Matrix energy_swap(const Matrix& energy) {
    const Index d = energy.rows();
    Matrix s = Matrix::Zero(d * d, d * d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) s(j * d + i, i * d + j) = 1.0;
    const Matrix b = kron(energy, Matrix::Identity(d, d));
    return b * s * b.adjoint();
}

inline void finish_report(ProtocolReport& r, const TransformTask& task, const Plan& plan, const DensityMatrix& final_state,
                          double q_bath, double ds_bath, const StageTwoResult& s2) {
    r.final_state = final_state;
    r.regularized_target = plan.target_reg;
    r.error = trace_norm_distance(final_state, task.sigma_u);
    r.error_vs_regularized = trace_norm_distance(final_state, plan.target_reg);
    thermo::ThermoLedger& l = r.ledger;
    l.T = task.T;
    l.mode = thermo::WeightMode::conservation;
    l.delta_U = expectation(task.h_u, final_state) - expectation(task.h_u, task.rho_u0);
    l.Q = q_bath;
    l.delta_S_u = von_neumann_entropy(final_state) - von_neumann_entropy(task.rho_u0);
    l.delta_S_b = ds_bath;
    l.delta_F_u = l.delta_U - task.T * l.delta_S_u;
    l.delta_F_b = l.Q - task.T * l.delta_S_b;
    l.W = -l.delta_U - l.Q;
    l.validate();
    r.first_law_residual = thermo::audit_first_law(l);
    r.second_law_margin = thermo::audit_second_law(l);
    r.free_energy_drop = -l.delta_F_u;
    r.gap = r.free_energy_drop - l.W;
    const double d = static_cast<double>(task.h_u.dim());
    r.rank_floor_term = d * task.eta * std::abs(std::log(task.eta));
    r.epsilon_prime = s2.chi_square_bound + r.rank_floor_term;
    r.margin = l.W - (r.free_energy_drop - r.epsilon_prime);
    r.steps = s2.steps.size();
    r.staircase = s2.steps;
    if (!s2.steps.empty()) r.min_step_delta_F_b = r.max_step_delta_F_b = s2.steps.front().delta_F_b;
    for (const auto& st : s2.steps) {
        r.max_bath_energy = std::max(r.max_bath_energy, st.energies.maxCoeff());
        r.gibbs_step_constant = std::max(r.gibbs_step_constant, task.T * st.r.cwiseInverse().sum());
        r.min_step_delta_F_b = std::min(r.min_step_delta_F_b, st.delta_F_b);
        r.max_step_delta_F_b = std::max(r.max_step_delta_F_b, st.delta_F_b);
    }
}

}  // namespace detail

// Exact weight: the staircase is classical bookkeeping on energy populations.
inline ProtocolReport run_exact(const TransformTask& task, const ProtocolOptions& opt = {}) {
    const detail::Plan plan = detail::make_plan(task, opt);
    StageTwoResult s2 = stage2_execute(plan.a0, plan.e_u, plan.steps, task.T);
    const Matrix diag = plan.energy * s2.populations.cast<cplx>().asDiagonal() * plan.energy.adjoint();
    Matrix rho = plan.v4 * plan.v3 * diag * plan.v3.adjoint() * plan.v4.adjoint();
    rho = detail::after_offset(task, opt, rho);

    ProtocolReport r;
    r.path = "exact-unitary";
    detail::finish_report(r, task, plan, DensityMatrix::normalized(rho), s2.delta_E_b, s2.delta_S_b, s2);
    r.momentum_marginal = RealVector::Ones(1);
    return r;
}

// Per-node protocol for a weight with momentum p: every stage unitary V is applied as
// U(p) = D(p) V D(p)^dagger on the space it acts on. Returns the conditional subsystem
// state, and accumulates bath marginals per step.
struct NodeRun {
    Matrix rho_u;
    std::vector<Matrix> bath;  // per step, after the swap
};

inline NodeRun run_node(const TransformTask& task, const detail::Plan& plan, double shift, const Matrix& rho0) {
    const Matrix hu = task.h_u.matrix();
    const Index d = task.h_u.dim();
    auto dressed = [&](const Matrix& h, const Matrix& v) {
        if (shift == 0.0) return v;
        const Matrix dd = unitary_from_hermitian(h, -shift);
        return Matrix(dd * v * dd.adjoint());
    };
    NodeRun out;
    Matrix rho = rho0;
    const Matrix u1 = dressed(hu, plan.v1);
    rho = u1 * rho * u1.adjoint();
    const Matrix swap = detail::energy_swap(plan.energy);
    const SubsystemLayout layout{{"u", d}, {"b", d}};
    for (const auto& st : plan.steps) {
        const Matrix hb = st.energies.cast<cplx>().asDiagonal();
        const Matrix hs = kron(hu, Matrix::Identity(d, d)) + kron(Matrix::Identity(d, d), hb);
        const Matrix u = dressed(hs, swap);
        const Matrix joint = u * kron(rho, Matrix(st.r.cast<cplx>().asDiagonal())) * u.adjoint();
        rho = partial_trace(joint, layout, {"u"});
        out.bath.push_back(partial_trace(joint, layout, {"b"}));
    }
    const Matrix u34 = dressed(hu, plan.v4 * plan.v3);
    out.rho_u = u34 * rho * u34.adjoint();
    return out;
}

inline ProtocolReport run_weighted(const TransformTask& task, const weight::WeightDistribution& mu, const ProtocolOptions& opt = {}) {
    const detail::Plan plan = detail::make_plan(task, opt);
    const auto& nodes = mu.nodes();
    std::vector<NodeRun> runs(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) { runs[i] = run_node(task, plan, nodes[i].p - mu.p0(), task.rho_u0.matrix()); });
    const Index d = task.h_u.dim();
    Matrix rho = Matrix::Zero(d, d);
    RealVector marginal(static_cast<Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        rho += nodes[i].w * runs[i].rho_u;
        marginal(static_cast<Index>(i)) = nodes[i].w * runs[i].rho_u.trace().real();
    }
    double q = 0.0, ds = 0.0;
    for (std::size_t j = 0; j < plan.steps.size(); ++j) {
        Matrix b = Matrix::Zero(d, d);
        for (std::size_t i = 0; i < nodes.size(); ++i) b += nodes[i].w * runs[i].bath[j];
        const RealVector& r = plan.steps[j].r;
        const RealVector& e = plan.steps[j].energies;
        q += (b.diagonal().real() - r).dot(e);
        ds += entropy_of_spectrum(eigh(b).values) - shannon(r);
    }
    StageTwoResult bound = stage2_execute(plan.a0, plan.e_u, plan.steps, task.T);
    ProtocolReport r;
    r.path = "weight-nodes";
    detail::finish_report(r, task, plan, DensityMatrix::normalized(detail::after_offset(task, opt, rho)), q, ds, bound);
    r.momentum_marginal = marginal;
    return r;
}

// Full clock simulation of the composed unitary on u (x) b_1 .. b_m. The engine
// Hamiltonian commutes with the generator, so it factors out exactly: the crossing is
// simulated with the bare generator and exp(-i H_s t) is applied to the result.
inline ProtocolReport run_clock(const TransformTask& task, const ProtocolOptions& opt) {
    const ClockPathOptions& c = *opt.clock;
    const detail::Plan plan = detail::make_plan(task, opt);
    const Index d = task.h_u.dim();
    const std::size_t m = plan.steps.size();
    Index total = d;
    for (std::size_t j = 0; j < m; ++j) {
        total *= d;
        if (total > 16) throw std::invalid_argument("run_protocol: clock path supports total engine dimension <= 16");
    }
    const Index baths = total / d;
    auto embed_u = [&](const Matrix& v) { return kron(v, Matrix::Identity(baths, baths)); };

    // Hamiltonian and composed unitary on u (x) b_1 (x) ... (x) b_m.
    Matrix hs = embed_u(task.h_u.matrix());
    Matrix rho0 = task.rho_u0.matrix();
    auto factor_op = [&](std::size_t slot, const Matrix& op) {
        Matrix out = Matrix::Identity(1, 1);
        for (std::size_t k = 0; k <= m; ++k) out = kron(out, k == slot ? op : Matrix(Matrix::Identity(d, d)));
        return out;
    };
    for (std::size_t j = 0; j < m; ++j) {
        hs += factor_op(j + 1, plan.steps[j].energies.cast<cplx>().asDiagonal());
        rho0 = kron(rho0, Matrix(plan.steps[j].r.cast<cplx>().asDiagonal()));
    }
    Matrix v = embed_u(plan.v1);
    for (std::size_t j = 0; j < m; ++j) {
        // swap u <-> b_{j+1}: permute factor indices (energy basis on u).
        Matrix s = Matrix::Zero(total, total);
        for (Index col = 0; col < total; ++col) {
            std::vector<Index> idx(m + 1);
            Index rest = col;
            for (std::size_t k = m + 1; k-- > 0;) {
                idx[k] = rest % d;
                rest /= d;
            }
            std::swap(idx[0], idx[j + 1]);
            Index row = 0;
            for (std::size_t k = 0; k <= m; ++k) row = row * d + idx[k];
            s(row, col) = 1.0;
        }
        const Matrix b = embed_u(plan.energy);
        v = b * s * b.adjoint() * v;
    }
    v = embed_u(plan.v4 * plan.v3) * v;
    const auto gv = clock::commuting_generator(Matrix::Zero(total, total), v);

    const weight::WeightDistribution mu = opt.weight.value_or(weight::WeightDistribution::delta(0.0));
    const clock::InteractionWindow window(c.window_start, c.window_length, c.profile);
    const clock::ClockMixture clk = clock::ClockMixture::pure(clock::ClockState::gaussian(c.grid, c.support));
    const Operator zero = Operator::hermitian(Matrix::Zero(total, total));
    Matrix rho = Matrix::Zero(total, total);
    std::vector<std::string> warnings = gv.warnings;
    for (const auto& node : mu.nodes()) {
        const Matrix dd = unitary_from_hermitian(hs, -(node.p - mu.p0()));
        const Operator g = Operator::hermitian(dd * gv.generator.matrix() * dd.adjoint());
        const clock::CrossingSetup setup{clock::build_total_hamiltonian(zero, {{window, g}}, c.grid, c.support), clk,
                                         DensityMatrix::normalized(rho0), c.dt};
        if (!(c.time > setup.hamiltonian.crossing_time()))
            throw std::invalid_argument("run_protocol: clock time must exceed the crossing time");
        rho += node.w * clock::simulate_crossing(setup, c.time).engine_state.matrix();
    }
    const Matrix free = unitary_from_hermitian(hs, c.time);
    rho = free * rho * free.adjoint();

    std::vector<SubsystemLayout::Factor> factors{{"u", d}};
    for (std::size_t j = 0; j < m; ++j) factors.push_back({"b" + std::to_string(j + 1), d});
    const SubsystemLayout layout(factors);
    const Matrix rho_u = partial_trace(rho, layout, {"u"});
    double q = 0.0, ds = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const Matrix b = partial_trace(rho, layout, {"b" + std::to_string(j + 1)});
        q += (b.diagonal().real() - plan.steps[j].r).dot(plan.steps[j].energies);
        ds += entropy_of_spectrum(eigh(b).values) - shannon(plan.steps[j].r);
    }
    StageTwoResult bound = stage2_execute(plan.a0, plan.e_u, plan.steps, task.T);
    ProtocolReport r;
    r.path = "clock";
    r.warnings = warnings;
    detail::finish_report(r, task, plan, DensityMatrix::normalized(rho_u), q, ds, bound);
    r.momentum_marginal = mu.weights();
    return r;
}

inline ProtocolReport run_protocol(const TransformTask& task, const ProtocolOptions& opt = {}) {
    if (opt.clock) return run_clock(task, opt);
    if (opt.weight && opt.weight->size() > 1) return run_weighted(task, *opt.weight, opt);
    return run_exact(task, opt);
}

// Weight momentum marginal after each of `runs` successive protocol applications, each
// on a fresh copy of the subsystem. Entry 0 is the initial distribution.
inline std::vector<RealVector> catalysis_marginals(const TransformTask& task, const weight::WeightDistribution& mu, int runs) {
    const detail::Plan plan = detail::make_plan(task, {});
    std::vector<RealVector> out{mu.weights()};
    RealVector w = mu.weights();
    for (int k = 0; k < runs; ++k) {
        RealVector next(w.size());
        std::vector<Matrix> cond(mu.size());
        parallel_for(mu.size(), [&](std::size_t i) {
            cond[i] = run_node(task, plan, mu.nodes()[i].p - mu.p0(), task.rho_u0.matrix()).rho_u;
        });
        for (std::size_t i = 0; i < mu.size(); ++i) next(static_cast<Index>(i)) = w(static_cast<Index>(i)) * cond[i].trace().real();
        w = next;
        out.push_back(w);
    }
    return out;
}

}  // namespace autoclock::protocol
