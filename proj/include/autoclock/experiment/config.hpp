// config.hpp: experiment configuration: JSON parsing with strict field checking,
// named presets, and rule-based validation that never runs anything.

#pragma once

#include "autoclock/clock/grid.hpp"
#include "autoclock/core/operator.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace autoclock::experiment {

using json = nlohmann::json;

// Malformed document: bad JSON, wrong types, unknown fields, unknown presets.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { crossing, channel, protocol, laws };

inline ExperimentKind parse_kind(const std::string& s) {
    if (s == "crossing") return ExperimentKind::crossing;
    if (s == "channel") return ExperimentKind::channel;
    if (s == "protocol") return ExperimentKind::protocol;
    if (s == "laws") return ExperimentKind::laws;
    throw ConfigError("unknown experiment '" + s + "' (expected crossing, channel, protocol or laws)");
}

inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::crossing: return "crossing";
        case ExperimentKind::channel: return "channel";
        case ExperimentKind::protocol: return "protocol";
        case ExperimentKind::laws: return "laws";
    }
    return "?";
}

// A matrix given inline (rows of [re, im] pairs) or by preset name.
struct MatrixSpec {
    std::string preset;
    std::optional<Matrix> dense;

    std::string describe() const { return dense ? "dense " + std::to_string(dense->rows()) + "x" + std::to_string(dense->cols()) : preset; }
};

// ----------------------------------------------------------------- presets

inline const std::set<std::string>& hamiltonian_presets() {
    static const std::set<std::string> s{"qubit01", "qubit-degenerate"};
    return s;
}
inline const std::set<std::string>& unitary_presets() {
    static const std::set<std::string> s{"identity", "phase", "swap", "hadamard"};
    return s;
}
inline const std::set<std::string>& state_presets() {
    static const std::set<std::string> s{"ground", "excited", "plus-state", "gibbs", "maximally-mixed"};
    return s;
}

inline Operator resolve_hamiltonian(const MatrixSpec& m) {
    if (m.dense) {
        if (!is_square(*m.dense) || !is_hermitian(*m.dense, 1e-10)) throw ConfigError("hamiltonian: matrix is not square Hermitian");
        return Operator::hermitian(0.5 * (*m.dense + m.dense->adjoint()));
    }
    if (m.preset == "qubit01") return Operator::diagonal({0.0, 1.0});
    if (m.preset == "qubit-degenerate") return Operator::diagonal({0.5, 0.5});
    throw ConfigError("hamiltonian: unknown preset '" + m.preset + "'");
}

inline Operator resolve_unitary(const MatrixSpec& m, Index dim) {
    Matrix u;
    if (m.dense) {
        u = *m.dense;
    } else if (m.preset == "identity") {
        u = Matrix::Identity(dim, dim);
    } else if (unitary_presets().count(m.preset)) {
        if (dim != 2) throw ConfigError("unitary preset '" + m.preset + "' needs a two-level engine");
        u = Matrix::Zero(2, 2);
        if (m.preset == "phase") {
            u(0, 0) = 1.0;
            u(1, 1) = std::exp(cplx(0.0, std::numbers::pi / 3.0));
        } else if (m.preset == "swap") {
            u(0, 1) = u(1, 0) = 1.0;
        } else {
            u << 1.0, 1.0, 1.0, -1.0;
            u /= std::sqrt(2.0);
        }
    } else {
        throw ConfigError("unitary: unknown preset '" + m.preset + "'");
    }
    if (u.rows() != dim || !is_unitary(u, 1e-9)) throw ConfigError("unitary: matrix is not a unitary of dimension " + std::to_string(dim));
    return Operator::unitary(u);
}

inline DensityMatrix resolve_state(const MatrixSpec& m, const Operator& h, double temperature) {
    const Index d = h.dim();
    if (m.dense) {
        if (m.dense->rows() != d || m.dense->cols() != d) throw ConfigError("state: dimension does not match the Hamiltonian");
        try {
            return DensityMatrix::normalized(*m.dense);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("state: ") + e.what());
        }
    }
    if (m.preset == "ground") return DensityMatrix::basis(d, 0);
    if (m.preset == "excited") return DensityMatrix::basis(d, d - 1);
    if (m.preset == "maximally-mixed") return DensityMatrix::maximally_mixed(d);
    if (m.preset == "plus-state") return DensityMatrix::pure(Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d))));
    if (m.preset == "gibbs") return thermal_state(h, temperature);
    throw ConfigError("state: unknown preset '" + m.preset + "'");
}

// ---------------------------------------------------------------- params

struct WeightSpec {
    double p0{0.0};
    double sigma{1.0};
    int points{41};
};

struct ClockBump {
    std::optional<double> center;
    std::optional<double> sigma;
    double weight{1.0};
};

struct CrossingParams {
    MatrixSpec hamiltonian{"qubit01", {}};
    MatrixSpec target{"identity", {}};
    MatrixSpec state{"plus-state", {}};
    std::size_t points{512};
    double period{64.0};
    double origin{-16.0};
    clock::Interval support{-8.0, 0.0};
    std::vector<ClockBump> clock;  // empty: single default Gaussian
    double window_start{0.0};
    double window_length{8.0};
    clock::Profile profile{clock::Profile::gaussian};
    double dt{1.0 / 64.0};
    std::vector<double> time_factors{1.5};  // t = factor * tau
    double tol_engine{1e-3};
    double tol_clock{1e-3};
    double tol_product{1e-3};
};

struct ChannelParams {
    MatrixSpec hamiltonian{"qubit01", {}};
    MatrixSpec target{"hadamard", {}};
    MatrixSpec state{"ground", {}};
    WeightSpec weight{};
    std::vector<double> deltas;  // default 1, 1/2, ..., 2^-8
    double tol_final_error{1e-3};
    double tol_jitter{0.1};
};

enum class GapScale { delta_p, delta_p_times_bath_energy };

struct ProtocolParams {
    MatrixSpec hamiltonian{"qubit01", {}};
    MatrixSpec initial_state{"excited", {}};
    MatrixSpec target_state{"gibbs", {}};
    double temperature{1.0};
    std::vector<double> delta_p{0.1, 0.01, 0.001};
    double eta{1e-8};
    std::optional<WeightSpec> weight;
    std::optional<double> expected_work;
    double tol_gap_factor{10.0};
    GapScale gap_scale{GapScale::delta_p};
    double tol_state_error{1e-6};
};

struct LawsParams {
    int scenarios{200};
    int cyclic_every{4};
    int sites{32};
    bool noncompliant_control{true};
    double tol_first_law{1e-8};
    double tol_second_law{1e-8};
    double tol_entropy{1e-8};
    double tol_noncompliant{1e-3};
};

struct ExperimentConfig {
    ExperimentKind kind{ExperimentKind::crossing};
    std::uint64_t seed{0};
    std::string description;
    json document;  // the input, echoed into the report
    std::variant<CrossingParams, ChannelParams, ProtocolParams, LawsParams> params;
};

// ---------------------------------------------------------------- parsing

namespace detail {

// Object view that rejects keys nobody asked for.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    bool has(const std::string& k) {
        seen_.insert(k);
        return j_.contains(k);
    }

    const json& at(const std::string& k) {
        seen_.insert(k);
        return j_.at(k);
    }

    std::string path(const std::string& k) const { return where_ + "." + k; }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError(where_ + ": unknown field '" + k + "'");
    }

    template <class T>
    void get(const std::string& k, T& out) {
        if (!has(k)) return;
        out = scalar<T>(at(k), path(k));
    }

    template <class T>
    static T scalar(const json& v, const std::string& where) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(where + ": expected a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
            if constexpr (std::is_unsigned_v<T>)
                if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0) throw ConfigError(where + ": expected a non-negative integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ConfigError(where + ": expected a number");
        } else {
            if (!v.is_string()) throw ConfigError(where + ": expected a string");
        }
        return v.get<T>();
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

inline std::vector<double> number_list(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(Fields::scalar<double>(x, where));
    return out;
}

inline MatrixSpec matrix_spec(const json& v, const std::string& where, const std::set<std::string>& presets) {
    if (v.is_string()) {
        const auto name = v.get<std::string>();
        if (!presets.count(name)) throw ConfigError(where + ": unknown preset '" + name + "'");
        return {name, {}};
    }
    if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a preset name or rows of [re, im] pairs");
    const auto rows = static_cast<Index>(v.size());
    Index cols = -1;
    Matrix m;
    for (Index r = 0; r < rows; ++r) {
        const json& row = v[static_cast<std::size_t>(r)];
        if (!row.is_array()) throw ConfigError(where + ": each row must be an array");
        if (cols < 0) {
            cols = static_cast<Index>(row.size());
            m = Matrix::Zero(rows, cols);
        }
        if (static_cast<Index>(row.size()) != cols) throw ConfigError(where + ": ragged matrix");
        for (Index c = 0; c < cols; ++c) {
            const json& e = row[static_cast<std::size_t>(c)];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                throw ConfigError(where + ": entries must be [re, im] pairs");
            m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
        }
    }
    return {"", m};
}

inline void get_matrix(Fields& f, const std::string& k, MatrixSpec& out, const std::set<std::string>& presets) {
    if (f.has(k)) out = matrix_spec(f.at(k), f.path(k), presets);
}

inline WeightSpec weight_spec(const json& v, const std::string& where) {
    Fields f(v, where);
    WeightSpec w;
    f.get("p0", w.p0);
    f.get("sigma", w.sigma);
    f.get("points", w.points);
    f.finish();
    return w;
}

inline CrossingParams crossing_params(Fields& params, Fields& tol) {
    CrossingParams p;
    get_matrix(params, "hamiltonian", p.hamiltonian, hamiltonian_presets());
    get_matrix(params, "target", p.target, unitary_presets());
    get_matrix(params, "state", p.state, state_presets());
    if (params.has("grid")) {
        Fields g(params.at("grid"), params.path("grid"));
        g.get("points", p.points);
        g.get("period", p.period);
        g.get("origin", p.origin);
        g.finish();
    }
    if (params.has("clock")) {
        Fields c(params.at("clock"), params.path("clock"));
        if (c.has("support")) {
            const auto s = number_list(c.at("support"), c.path("support"));
            if (s.size() != 2) throw ConfigError(c.path("support") + ": expected [lo, hi]");
            p.support = {s[0], s[1]};
        }
        if (c.has("states")) {
            const json& arr = c.at("states");
            if (!arr.is_array() || arr.empty()) throw ConfigError(c.path("states") + ": expected a non-empty array");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                Fields b(arr[i], c.path("states") + "[" + std::to_string(i) + "]");
                ClockBump bump;
                if (b.has("center")) bump.center = Fields::scalar<double>(b.at("center"), b.path("center"));
                if (b.has("sigma")) bump.sigma = Fields::scalar<double>(b.at("sigma"), b.path("sigma"));
                b.get("weight", bump.weight);
                b.finish();
                p.clock.push_back(bump);
            }
        }
        c.finish();
    }
    if (params.has("window")) {
        Fields w(params.at("window"), params.path("window"));
        w.get("start", p.window_start);
        w.get("length", p.window_length);
        if (w.has("profile")) {
            const auto s = Fields::scalar<std::string>(w.at("profile"), w.path("profile"));
            if (s == "gaussian") p.profile = clock::Profile::gaussian;
            else if (s == "rectangular") p.profile = clock::Profile::rectangular;
            else throw ConfigError(w.path("profile") + ": expected gaussian or rectangular");
        }
        w.finish();
    }
    params.get("dt", p.dt);
    if (params.has("time_factors")) p.time_factors = number_list(params.at("time_factors"), params.path("time_factors"));
    tol.get("engine_error", p.tol_engine);
    tol.get("clock_error", p.tol_clock);
    tol.get("product_error", p.tol_product);
    return p;
}

inline ChannelParams channel_params(Fields& params, Fields& tol) {
    ChannelParams p;
    get_matrix(params, "hamiltonian", p.hamiltonian, hamiltonian_presets());
    get_matrix(params, "target", p.target, unitary_presets());
    get_matrix(params, "state", p.state, state_presets());
    if (params.has("weight")) p.weight = weight_spec(params.at("weight"), params.path("weight"));
    if (params.has("deltas")) {
        p.deltas = number_list(params.at("deltas"), params.path("deltas"));
    } else {
        for (int k = 0; k <= 8; ++k) p.deltas.push_back(std::ldexp(1.0, -k));
    }
    tol.get("final_error", p.tol_final_error);
    tol.get("jitter", p.tol_jitter);
    return p;
}

inline ProtocolParams protocol_params(Fields& params, Fields& tol) {
    ProtocolParams p;
    get_matrix(params, "hamiltonian", p.hamiltonian, hamiltonian_presets());
    get_matrix(params, "initial_state", p.initial_state, state_presets());
    get_matrix(params, "target_state", p.target_state, state_presets());
    params.get("temperature", p.temperature);
    if (params.has("delta_p")) p.delta_p = number_list(params.at("delta_p"), params.path("delta_p"));
    params.get("eta", p.eta);
    if (params.has("weight")) p.weight = weight_spec(params.at("weight"), params.path("weight"));
    if (params.has("expected_work")) p.expected_work = Fields::scalar<double>(params.at("expected_work"), params.path("expected_work"));
    tol.get("gap_factor", p.tol_gap_factor);
    if (tol.has("gap_scale")) {
        const auto s = Fields::scalar<std::string>(tol.at("gap_scale"), tol.path("gap_scale"));
        if (s == "delta_p") p.gap_scale = GapScale::delta_p;
        else if (s == "delta_p_times_bath_energy") p.gap_scale = GapScale::delta_p_times_bath_energy;
        else throw ConfigError(tol.path("gap_scale") + ": expected delta_p or delta_p_times_bath_energy");
    }
    tol.get("state_error", p.tol_state_error);
    return p;
}

inline LawsParams laws_params(Fields& params, Fields& tol) {
    LawsParams p;
    params.get("scenarios", p.scenarios);
    params.get("cyclic_every", p.cyclic_every);
    params.get("sites", p.sites);
    params.get("noncompliant_control", p.noncompliant_control);
    tol.get("first_law", p.tol_first_law);
    tol.get("second_law", p.tol_second_law);
    tol.get("entropy", p.tol_entropy);
    tol.get("noncompliant_residual", p.tol_noncompliant);
    return p;
}

}  // namespace detail

// Parses a config document. `expected` (the CLI's experiment argument) must match the
// document's "experiment" field when that field is present.
inline ExperimentConfig parse_config(const json& doc, std::optional<ExperimentKind> expected = {}) {
    detail::Fields top(doc, "config");
    ExperimentConfig cfg;
    cfg.document = doc;
    if (top.has("experiment")) {
        cfg.kind = parse_kind(detail::Fields::scalar<std::string>(top.at("experiment"), "config.experiment"));
        if (expected && *expected != cfg.kind)
            throw ConfigError("config.experiment is '" + to_string(cfg.kind) + "' but '" + to_string(*expected) + "' was requested");
    } else if (expected) {
        cfg.kind = *expected;
    } else {
        throw ConfigError("config: missing field 'experiment'");
    }
    top.get("seed", cfg.seed);
    top.get("description", cfg.description);
    static const json empty = json::object();
    detail::Fields params(top.has("parameters") ? top.at("parameters") : empty, "config.parameters");
    detail::Fields tol(top.has("tolerances") ? top.at("tolerances") : empty, "config.tolerances");
    try {
        switch (cfg.kind) {
            case ExperimentKind::crossing: cfg.params = detail::crossing_params(params, tol); break;
            case ExperimentKind::channel: cfg.params = detail::channel_params(params, tol); break;
            case ExperimentKind::protocol: cfg.params = detail::protocol_params(params, tol); break;
            case ExperimentKind::laws: cfg.params = detail::laws_params(params, tol); break;
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    params.finish();
    tol.finish();
    top.finish();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path, std::optional<ExperimentKind> expected = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc, expected);
}

// ------------------------------------------------------------- validation

namespace detail {

inline void check_state_preset(const MatrixSpec& s, const std::string& name, std::vector<std::string>& out) {
    if (s.dense && (!is_hermitian(*s.dense, 1e-10) || std::abs(s.dense->trace() - cplx(1.0)) > 1e-10 ||
                    eigh(0.5 * (*s.dense + s.dense->adjoint())).values.minCoeff() < -1e-10))
        out.push_back(name + ": not a density matrix (Hermitian, unit trace, positive)");
}

inline std::optional<Operator> try_hamiltonian(const MatrixSpec& m, const std::string& name, std::vector<std::string>& out) {
    try {
        return resolve_hamiltonian(m);
    } catch (const ConfigError& e) {
        out.push_back(name + ": " + e.what());
        return std::nullopt;
    }
}

inline void validate_crossing(const CrossingParams& p, std::vector<std::string>& out) {
    if (p.points < 64 || (p.points & (p.points - 1)) != 0) out.push_back("grid.points must be a power of two >= 64");
    if (!(p.period > 0.0)) out.push_back("grid.period must be positive");
    if (!(p.dt > 0.0)) out.push_back("dt must be positive");
    if (!(p.window_length > 0.0)) out.push_back("window.length must be positive");
    if (!(p.support.hi > p.support.lo)) out.push_back("clock.support must satisfy lo < hi");
    if (p.window_start < p.support.hi)
        out.push_back("clock-independence assumption violated: interaction window [" + std::to_string(p.window_start) +
                      ", ...) overlaps the clock support ending at " + std::to_string(p.support.hi));
    const double tau = p.window_start + p.window_length - p.support.lo;
    for (double f : p.time_factors) {
        if (!(f > 0.0)) out.push_back("time_factors must be positive");
        const double t = f * tau;
        if (p.support.lo < p.origin || p.support.hi + t >= p.origin + p.period)
            out.push_back("periodic clock wraps around: period " + std::to_string(p.period) + " is too short for tau + t at t = " +
                          std::to_string(t) + "; the clock would re-enter the window");
    }
    double total = 0.0;
    for (const auto& b : p.clock) {
        if (b.weight < 0.0) out.push_back("clock.states weights must be non-negative");
        if (b.sigma && !(*b.sigma > 0.0)) out.push_back("clock.states sigma must be positive");
        if (b.center && !p.support.contains(*b.center)) out.push_back("clock.states center must lie inside the support");
        total += b.weight;
    }
    if (!p.clock.empty() && std::abs(total - 1.0) > 1e-12) out.push_back("clock.states weights must sum to 1");
    const auto h = try_hamiltonian(p.hamiltonian, "hamiltonian", out);
    if (!h) return;
    try {
        const Operator u = resolve_unitary(p.target, h->dim());
        if (commutator_norm(u.matrix(), h->matrix()) > 1e-9)
            out.push_back("target does not commute with the engine Hamiltonian; the clock implements energy-conserving unitaries only");
    } catch (const ConfigError& e) {
        out.push_back(std::string("target: ") + e.what());
    }
    try {
        resolve_state(p.state, *h, 1.0);
    } catch (const ConfigError& e) {
        out.push_back(std::string("state: ") + e.what());
    }
    check_state_preset(p.state, "state", out);
}

inline void validate_weight(const WeightSpec& w, std::vector<std::string>& out) {
    if (!(w.sigma > 0.0)) out.push_back("weight.sigma must be positive");
    if (w.points < 1 || w.points > 201) out.push_back("weight.points must lie in [1, 201]");
}

inline void validate_channel(const ChannelParams& p, std::vector<std::string>& out) {
    validate_weight(p.weight, out);
    for (double d : p.deltas)
        if (!(d > 0.0 && d <= 1.0)) out.push_back("deltas must lie in (0, 1]");
    if (!(p.tol_jitter >= 0.0)) out.push_back("tolerances.jitter must be non-negative");
    const auto h = try_hamiltonian(p.hamiltonian, "hamiltonian", out);
    if (!h) return;
    try {
        resolve_unitary(p.target, h->dim());
        resolve_state(p.state, *h, 1.0);
    } catch (const ConfigError& e) {
        out.push_back(e.what());
    }
    check_state_preset(p.state, "state", out);
}

inline void validate_protocol(const ProtocolParams& p, std::vector<std::string>& out) {
    if (!(p.temperature > 0.0)) out.push_back("temperature must be positive");
    for (double d : p.delta_p)
        if (!(d > 0.0 && d < 1.0)) out.push_back("delta_p out of range: each value must lie in (0, 1)");
    if (p.weight) validate_weight(*p.weight, out);
    const auto h = try_hamiltonian(p.hamiltonian, "hamiltonian", out);
    if (!h) return;
    if (!(p.eta > 0.0 && p.eta < 1.0 / static_cast<double>(h->dim()))) out.push_back("eta must lie in (0, 1/d_u)");
    try {
        resolve_state(p.initial_state, *h, p.temperature > 0.0 ? p.temperature : 1.0);
        resolve_state(p.target_state, *h, p.temperature > 0.0 ? p.temperature : 1.0);
    } catch (const ConfigError& e) {
        out.push_back(e.what());
    }
    check_state_preset(p.initial_state, "initial_state", out);
    check_state_preset(p.target_state, "target_state", out);
}

inline void validate_laws(const LawsParams& p, std::vector<std::string>& out) {
    if (p.scenarios < 1 || p.scenarios > 100000) out.push_back("scenarios must lie in [1, 100000]");
    if (p.cyclic_every < 0) out.push_back("cyclic_every must be non-negative (0 disables cyclic scenarios)");
    if (p.sites < 24 || p.sites > 256) out.push_back("sites must lie in [24, 256] so energy shifts stay clear of the lattice edge");
}

}  // namespace detail

// All rule violations, without running anything. Empty means the config is runnable.
inline std::vector<std::string> validate(const ExperimentConfig& cfg) {
    std::vector<std::string> out;
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, CrossingParams>) detail::validate_crossing(p, out);
            else if constexpr (std::is_same_v<P, ChannelParams>) detail::validate_channel(p, out);
            else if constexpr (std::is_same_v<P, ProtocolParams>) detail::validate_protocol(p, out);
            else detail::validate_laws(p, out);
        },
        cfg.params);
    return out;
}

}  // namespace autoclock::experiment
