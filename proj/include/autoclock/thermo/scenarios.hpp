// scenarios.hpp: randomized u (x) b (x) w runs for auditing the laws.
//
// The system s = u (x) b has integer energies; the weight is the finite cyclic lattice,
// so W can be read off the weight directly and compared with the first law. The
// packet sits mid-lattice and every energy shift stays clear of the edge.

#pragma once

#include "autoclock/core/random.hpp"
#include "autoclock/thermo/ledger.hpp"
#include "autoclock/weight/lattice.hpp"

#include <numbers>
#include <vector>

namespace autoclock::thermo {

struct LawScenario {
    RealVector subsystem_levels;   // H_u eigenvalues (integers)
    std::vector<double> bath_gaps;  // one qubit per gap, levels {0, gap}
    double temperature{1.0};
    double p0{0.0};
    Matrix v_s;  // unitary on u (x) b
    DensityMatrix rho_u;
    bool cyclic{false};  // v_s acts on the bath only

    Operator h_u() const { return Operator::diagonal(subsystem_levels); }
    Operator h_b() const {
        Operator h = Operator::diagonal({0.0, bath_gaps.front()});
        for (std::size_t k = 1; k < bath_gaps.size(); ++k)
            h = Operator::hermitian(kron(h.matrix(), Matrix::Identity(2, 2)) +
                                    kron(Matrix::Identity(h.dim(), h.dim()), Operator::diagonal({0.0, bath_gaps[k]}).matrix()));
        return h;
    }
    Operator h_s() const {
        const Index du = h_u().dim(), db = h_b().dim();
        return Operator::hermitian(kron(h_u().matrix(), Matrix::Identity(db, db)) + kron(Matrix::Identity(du, du), h_b().matrix()));
    }
};

struct ScenarioOutcome {
    ThermoLedger ledger;
    double first_law_residual{0.0};
    double second_law_margin{0.0};
    double entropy_delta_ub{0.0};
    double subadditivity_margin{0.0};
    bool compliant{true};
};

inline LawScenario random_law_scenario(RandomSource& rng, bool cyclic) {
    LawScenario s;
    const int du = rng.integer(2, 3);
    s.subsystem_levels.resize(du);
    for (int k = 0; k < du; ++k) s.subsystem_levels(k) = rng.integer(0, 2);
    const int qubits = rng.integer(1, 2);
    for (int k = 0; k < qubits; ++k) s.bath_gaps.push_back(rng.integer(1, 2));
    s.temperature = rng.uniform(0.3, 3.0);
    s.p0 = rng.uniform(-std::numbers::pi, std::numbers::pi);
    s.cyclic = cyclic;
    const Index db = Index{1} << qubits;
    s.v_s = cyclic ? kron(Matrix::Identity(du, du), rng.unitary(db)) : rng.unitary(du * db);
    s.rho_u = rng.density(du, rng.integer(1, du));
    return s;
}

namespace detail {

inline Marginals split(const Matrix& rho_ub, Index du, Index db, std::optional<double> weight_energy) {
    const SubsystemLayout l{{"u", du}, {"b", db}};
    return {partial_trace(rho_ub, l, {"u"}), partial_trace(rho_ub, l, {"b"}), weight_energy};
}

inline double weight_energy(const Matrix& rho_w) {
    double e = 0.0;
    for (Index x = 0; x < rho_w.rows(); ++x) e += static_cast<double>(x) * rho_w(x, x).real();
    return e;
}

}  // namespace detail

// Product initial state rho_u (x) thermal bath (x) weight packet, evolved by the engine
// unitary of the cyclic weight model. Explicit weight mode.
inline ScenarioOutcome run_law_scenario(const LawScenario& s, Index sites = 32) {
    const Operator hu = s.h_u(), hb = s.h_b();
    const Index du = hu.dim(), db = hb.dim();
    const weight::CyclicWeightModel model(weight::SystemSpec(s.h_s()), s.v_s, s.p0, sites);
    const double centre = 0.5 * static_cast<double>(sites);
    const double half_width = centre - 2.0 - static_cast<double>(model.max_shift());
    if (half_width < 2.0) throw std::invalid_argument("run_law_scenario: weight lattice too small for the energy range");
    const Vector chi = model.packet(centre, 1.5, half_width);

    const DensityMatrix rho_b = thermal_state(hb, s.temperature);
    const DensityMatrix rho_ub = tensor(s.rho_u, rho_b);
    const auto e = eigh(rho_ub.matrix());
    std::vector<double> w;
    std::vector<Matrix> runs;
    for (Index k = 0; k < e.values.size(); ++k) {
        if (e.values(k) <= 1e-15) continue;
        w.push_back(e.values(k));
        runs.push_back(model.apply(e.vectors.col(k), chi));
    }
    const auto after = weight::lattice_marginals(w, runs);
    const Matrix w0 = chi * chi.adjoint();

    ScenarioOutcome o;
    o.ledger = ledger_from_marginals(detail::split(rho_ub.matrix(), du, db, detail::weight_energy(w0)),
                                     detail::split(after.system, du, db, detail::weight_energy(after.weight)), hu, hb,
                                     s.temperature, WeightMode::explicit_weight);
    o.first_law_residual = audit_first_law(o.ledger);
    o.second_law_margin = audit_second_law(o.ledger);
    o.subadditivity_margin = audit_subadditivity(o.ledger);
    o.entropy_delta_ub = entropy_of_spectrum(eigh(after.system).values) - von_neumann_entropy(rho_ub);
    return o;
}

// Negative control: V_s applied with the weight left alone (U_e = V_s (x) 1_w), which
// breaks [U_e, H_e] = 0 whenever V_s moves energy.
inline ScenarioOutcome run_noncompliant_scenario(const LawScenario& s) {
    const Operator hu = s.h_u(), hb = s.h_b();
    const Index du = hu.dim(), db = hb.dim();
    const DensityMatrix rho_ub = tensor(s.rho_u, thermal_state(hb, s.temperature));
    const Matrix after = s.v_s * rho_ub.matrix() * s.v_s.adjoint();
    ScenarioOutcome o;
    o.compliant = false;
    o.ledger = ledger_from_marginals(detail::split(rho_ub.matrix(), du, db, 0.0), detail::split(after, du, db, 0.0), hu,
                                     hb, s.temperature, WeightMode::explicit_weight);
    o.first_law_residual = audit_first_law(o.ledger);
    o.second_law_margin = audit_second_law(o.ledger);
    o.subadditivity_margin = audit_subadditivity(o.ledger);
    o.entropy_delta_ub = entropy_of_spectrum(eigh(after).values) - von_neumann_entropy(rho_ub);
    return o;
}

}  // namespace autoclock::thermo
