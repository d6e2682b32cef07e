// staircase.hpp: population staircase: swaps with fresh bath qudits whose Gibbs
// distributions walk from p to q in steps no larger than delta_p.

#pragma once

#include "autoclock/core/operator.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace autoclock::protocol {

struct StaircaseStep {
    std::size_t index{0};
    RealVector r;         // bath Gibbs distribution of this step
    RealVector energies;  // -T ln r, shifted so the minimum is 0
    // Filled by stage2_execute:
    double delta_E_u{0.0};
    double delta_E_b{0.0};
    double delta_S_u{0.0};
    double delta_S_b{0.0};
    double delta_F_u{0.0};
    double delta_F_b{0.0};
    double chi_square{0.0};  // chi^2(a || r) of the populations swapped in
};

inline double shannon(const RealVector& p) {
    double s = 0.0;
    for (Index k = 0; k < p.size(); ++k)
        if (p(k) > 0.0) s -= p(k) * std::log(p(k));
    return s;
}

inline RealVector bath_energies(const RealVector& r, double temperature) {
    RealVector e = -temperature * r.array().log();
    return e.array() - e.minCoeff();
}

// Linear path r(j) = (1 - j/m) p + (j/m) q, m = ceil(max|p - q| / delta_p); steps 1..m.
inline std::vector<StaircaseStep> build_staircase(const RealVector& p, const RealVector& q, double delta_p, double temperature = 1.0) {
    if (p.size() != q.size()) throw std::invalid_argument("build_staircase: length mismatch");
    if (!(delta_p > 0.0)) throw std::invalid_argument("build_staircase: delta_p must be positive");
    if (p.minCoeff() <= 0.0 || q.minCoeff() <= 0.0)
        throw std::invalid_argument("build_staircase: distributions must be strictly positive (regularize first)");
    const double span = (p - q).cwiseAbs().maxCoeff();
    // Relative slack keeps exact ratios (0.4 / 0.1) from rounding up an extra step.
    const auto m = static_cast<std::size_t>(std::ceil(span / delta_p - 1e-9));
    std::vector<StaircaseStep> steps;
    for (std::size_t j = 1; j <= m; ++j) {
        const double s = static_cast<double>(j) / static_cast<double>(m);
        StaircaseStep st;
        st.index = j;
        st.r = j == m ? q : RealVector((1.0 - s) * p + s * q);
        st.energies = bath_energies(st.r, temperature);
        steps.push_back(std::move(st));
    }
    return steps;
}

struct StageTwoResult {
    RealVector populations;
    std::vector<StaircaseStep> steps;
    double delta_E_u{0.0};
    double delta_E_b{0.0};
    double delta_S_u{0.0};
    double delta_S_b{0.0};
    double delta_F_b{0.0};
    double chi_square_bound{0.0};  // T * sum_j chi^2_j, an upper bound on delta_F_b
};

// Runs the swaps on energy-diagonal subsystem populations `a` (levels `e_u`). Each bath
// qudit is fresh and used once, so its bookkeeping is classical: it enters with r and
// leaves with the subsystem's previous populations.
inline StageTwoResult stage2_execute(const RealVector& a0, const RealVector& e_u, std::vector<StaircaseStep> steps, double temperature) {
    if (a0.size() != e_u.size()) throw std::invalid_argument("stage2_execute: length mismatch");
    StageTwoResult out;
    RealVector a = a0;
    for (auto& st : steps) {
        const RealVector& r = st.r;
        st.delta_E_u = (r - a).dot(e_u);
        st.delta_E_b = (a - r).dot(st.energies);
        st.delta_S_u = shannon(r) - shannon(a);
        st.delta_S_b = -st.delta_S_u;
        st.delta_F_u = st.delta_E_u - temperature * st.delta_S_u;
        st.delta_F_b = st.delta_E_b - temperature * st.delta_S_b;
        st.chi_square = ((a - r).array().square() / r.array()).sum();
        out.delta_E_u += st.delta_E_u;
        out.delta_E_b += st.delta_E_b;
        out.delta_S_u += st.delta_S_u;
        out.delta_S_b += st.delta_S_b;
        out.delta_F_b += st.delta_F_b;
        out.chi_square_bound += temperature * st.chi_square;
        a = r;
    }
    out.populations = a;
    out.steps = std::move(steps);
    return out;
}

// Checks the stage order: subsystem must be diagonal in the energy basis.
inline RealVector energy_populations(const Matrix& rho_energy_basis, double tol = 1e-10) {
    if (!is_diagonal(rho_energy_basis, tol)) throw std::invalid_argument("stage2_execute: subsystem state is not energy-diagonal");
    return rho_energy_basis.diagonal().real();
}

}  // namespace autoclock::protocol
