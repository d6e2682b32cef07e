// ledger.hpp: internal energy, work and heat of a run, and the law audits.
//
// Sign conventions: dU = change of <H_u>, W = change of the weight energy (work
// stored), Q = change of <H_b> (heat emitted into the bath). First law: dU + W + Q = 0.

#pragma once

#include "autoclock/core/operator.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace autoclock::thermo {

enum class WeightMode { conservation, explicit_weight };

inline WeightMode parse_weight_mode(const std::string& s) {
    if (s == "conservation") return WeightMode::conservation;
    if (s == "explicit") return WeightMode::explicit_weight;
    throw std::invalid_argument("unknown weight_mode '" + s + "' (expected conservation or explicit)");
}

inline std::string to_string(WeightMode m) { return m == WeightMode::conservation ? "conservation" : "explicit"; }

struct ThermoLedger {
    double delta_U{0.0};
    double W{0.0};
    double Q{0.0};
    double delta_F_u{0.0};
    double delta_S_u{0.0};
    double delta_S_b{0.0};
    double delta_F_b{0.0};
    double T{1.0};
    WeightMode mode{WeightMode::conservation};

    void validate() const {
        for (double v : {delta_U, W, Q, delta_F_u, delta_S_u, delta_S_b, delta_F_b, T})
            if (!std::isfinite(v)) throw std::domain_error("ThermoLedger: non-finite entry");
        if (!(T > 0.0)) throw std::invalid_argument("ThermoLedger: temperature must be positive");
    }
};

// Reduced states at one instant. The weight energy is only needed in explicit mode.
struct Marginals {
    Matrix u;
    Matrix b;
    std::optional<double> weight_energy;
};

// Energies and entropies from reduced states; W from the weight (explicit) or from the
// first law (conservation).
inline ThermoLedger ledger_from_marginals(const Marginals& before, const Marginals& after, const Operator& h_u,
                                          const Operator& h_b, double temperature, WeightMode mode) {
    if (!(temperature > 0.0)) throw std::invalid_argument("ledger: temperature must be positive");
    if (before.u.rows() != h_u.dim() || after.u.rows() != h_u.dim() || before.b.rows() != h_b.dim() ||
        after.b.rows() != h_b.dim())
        throw std::invalid_argument("ledger: marginal dimensions do not match the Hamiltonians");
    auto energy = [](const Matrix& h, const Matrix& rho) { return (h * rho).trace().real(); };
    auto entropy = [](const Matrix& rho) { return entropy_of_spectrum(eigh(rho).values); };
    ThermoLedger l;
    l.T = temperature;
    l.mode = mode;
    l.delta_U = energy(h_u.matrix(), after.u) - energy(h_u.matrix(), before.u);
    l.Q = energy(h_b.matrix(), after.b) - energy(h_b.matrix(), before.b);
    l.delta_S_u = entropy(after.u) - entropy(before.u);
    l.delta_S_b = entropy(after.b) - entropy(before.b);
    l.delta_F_u = l.delta_U - temperature * l.delta_S_u;
    l.delta_F_b = l.Q - temperature * l.delta_S_b;
    if (mode == WeightMode::explicit_weight) {
        if (!before.weight_energy || !after.weight_energy)
            throw std::invalid_argument("ledger: explicit weight mode needs the weight energy");
        l.W = *after.weight_energy - *before.weight_energy;
    } else {
        l.W = -l.delta_U - l.Q;
    }
    l.validate();
    return l;
}

// Composite-state form. `layout` must contain "u" and "b"; explicit mode also needs "w"
// and its Hamiltonian.
inline ThermoLedger ledger_from_states(const DensityMatrix& before, const DensityMatrix& after,
                                       const SubsystemLayout& layout, const Operator& h_u, const Operator& h_b,
                                       double temperature, WeightMode mode, const std::optional<Operator>& h_w = {}) {
    if (before.dim() != layout.total_dim() || after.dim() != layout.total_dim())
        throw std::invalid_argument("ledger: state dimension does not match the layout");
    auto marginals = [&](const DensityMatrix& rho) {
        Marginals m{partial_trace(rho.matrix(), layout, {"u"}), partial_trace(rho.matrix(), layout, {"b"}), std::nullopt};
        if (mode == WeightMode::explicit_weight) {
            if (!layout.contains("w") || !h_w) throw std::invalid_argument("ledger: explicit weight mode needs a weight factor 'w'");
            m.weight_energy = (h_w->matrix() * partial_trace(rho.matrix(), layout, {"w"})).trace().real();
        }
        return m;
    };
    return ledger_from_marginals(marginals(before), marginals(after), h_u, h_b, temperature, mode);
}

// dU + W + Q; identically zero in conservation mode.
inline double audit_first_law(const ThermoLedger& l) { return l.delta_U + l.W + l.Q; }

// (-dF_u) - W; non-negative when no more work is drawn than the free-energy drop.
inline double audit_second_law(const ThermoLedger& l) { return -l.delta_F_u - l.W; }

// dS_u + dS_b; non-negative (subadditivity with a product initial state).
inline double audit_subadditivity(const ThermoLedger& l) { return l.delta_S_u + l.delta_S_b; }

inline double audit_entropy_monotone(const DensityMatrix& before_ub, const DensityMatrix& after_ub) {
    return von_neumann_entropy(after_ub) - von_neumann_entropy(before_ub);
}

}  // namespace autoclock::thermo
