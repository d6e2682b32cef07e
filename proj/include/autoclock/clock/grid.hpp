// grid.hpp: periodic clock lattice, clock wavefunctions and interaction windows.

#pragma once

#include "autoclock/core/operator.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace autoclock::clock {

struct Interval {
    double lo{0.0};
    double hi{0.0};

    double length() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

// Periodic 1-D lattice: x_j = origin + j*dx, j = 0..n-1, dx = period/n.
class ClockGrid {
public:
    explicit ClockGrid(std::size_t n_points = 512, double period = 64.0, double origin = -16.0)
        : n_(n_points), period_(period), origin_(origin) {
        if (n_ < 64 || (n_ & (n_ - 1)) != 0) throw std::invalid_argument("ClockGrid: n_points must be a power of two >= 64");
        if (!(period_ > 0.0)) throw std::invalid_argument("ClockGrid: period must be positive");
    }

    std::size_t size() const { return n_; }
    Index points() const { return static_cast<Index>(n_); }
    double period() const { return period_; }
    double origin() const { return origin_; }
    double dx() const { return period_ / static_cast<double>(n_); }
    double end() const { return origin_ + period_; }
    double position(Index j) const { return origin_ + static_cast<double>(j) * dx(); }

    // Momentum eigenvalue of DFT mode j (FFT storage order), 2*pi*m/period with m in [-n/2, n/2).
    double wavenumber(Index j) const {
        const auto n = static_cast<Index>(n_);
        const Index m = j < n / 2 ? j : j - n;
        return 2.0 * std::numbers::pi * static_cast<double>(m) / period_;
    }

    RealVector wavenumbers() const {
        RealVector k(points());
        for (Index j = 0; j < points(); ++j) k(j) = wavenumber(j);
        return k;
    }

private:
    std::size_t n_;
    double period_;
    double origin_;
};

// Exact lattice translation exp(-i P_c shift) applied to a clock wavefunction.
inline Vector translate(const Vector& amplitudes, const ClockGrid& grid, double shift) {
    if (amplitudes.size() != grid.points()) throw std::invalid_argument("translate: size mismatch");
    Eigen::FFT<double> fft;
    Vector spectrum(grid.points()), out(grid.points());
    fft.fwd(spectrum, amplitudes);
    for (Index j = 0; j < grid.points(); ++j) spectrum(j) *= std::exp(cplx(0.0, -grid.wavenumber(j) * shift));
    fft.inv(out, spectrum);
    return out;
}

// Clock wavefunction on the lattice with a declared position support.
class ClockState {
public:
    ClockState(ClockGrid grid, Vector amplitudes, Interval support)
        : grid_(grid), amps_(std::move(amplitudes)), support_(support) {
        if (amps_.size() != grid_.points()) throw std::invalid_argument("ClockState: amplitude count != grid size");
        if (!(support_.hi > support_.lo)) throw std::invalid_argument("ClockState: empty support interval");
        if (std::abs(amps_.norm() - 1.0) > 1e-12) throw std::invalid_argument("ClockState: amplitudes not normalized");
        for (Index j = 0; j < amps_.size(); ++j)
            if (!support_.contains(grid_.position(j)) && std::abs(amps_(j)) > 1e-12)
                throw std::invalid_argument("ClockState: amplitude outside the declared support");
    }

    // Gaussian amplitude exp(-(x-c)^2 / (2 sigma^2)) cut to the support interval, renormalized.
    static ClockState gaussian(const ClockGrid& grid, Interval support, double center, double sigma) {
        if (!(sigma > 0.0)) throw std::invalid_argument("ClockState::gaussian: sigma must be positive");
        Vector a = Vector::Zero(grid.points());
        for (Index j = 0; j < grid.points(); ++j) {
            const double x = grid.position(j);
            if (support.contains(x)) a(j) = std::exp(-0.5 * (x - center) * (x - center) / (sigma * sigma));
        }
        const double n = a.norm();
        if (n == 0.0) throw std::invalid_argument("ClockState::gaussian: support contains no grid points");
        return ClockState(grid, a / n, support);
    }

    // Default profile: centred in the support, sigma = K/10 (support edges at +-5 sigma).
    static ClockState gaussian(const ClockGrid& grid, Interval support) {
        return gaussian(grid, support, 0.5 * (support.lo + support.hi), support.length() / 10.0);
    }

    const ClockGrid& grid() const { return grid_; }
    const Vector& amplitudes() const { return amps_; }
    const Interval& support() const { return support_; }

    double mean_position() const {
        double m = 0.0;
        for (Index j = 0; j < amps_.size(); ++j) m += std::norm(amps_(j)) * grid_.position(j);
        return m;
    }

private:
    ClockGrid grid_;
    Vector amps_;
    Interval support_;
};

// Convex combination of clock wavefunctions (a mixed clock state).
struct ClockMixture {
    std::vector<double> weights;
    std::vector<ClockState> states;

    static ClockMixture pure(ClockState s) { return ClockMixture{{1.0}, {std::move(s)}}; }

    void validate() const {
        if (states.empty() || weights.size() != states.size()) throw std::invalid_argument("ClockMixture: empty or mismatched");
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw std::invalid_argument("ClockMixture: negative weight");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("ClockMixture: weights do not sum to 1");
    }

    Interval support() const {
        Interval s = states.front().support();
        for (const auto& st : states) {
            s.lo = std::min(s.lo, st.support().lo);
            s.hi = std::max(s.hi, st.support().hi);
        }
        return s;
    }

    const ClockGrid& grid() const { return states.front().grid(); }
};

enum class Profile { gaussian, rectangular };

// Position window of the interaction with a normalized profile f (integral 1).
class InteractionWindow {
public:
    InteractionWindow(double start, double length, Profile profile = Profile::gaussian)
        : start_(start), length_(length), profile_(profile) {
        if (!(length_ > 0.0)) throw std::invalid_argument("InteractionWindow: length must be positive");
    }

    double start() const { return start_; }
    double length() const { return length_; }
    double end() const { return start_ + length_; }
    Profile profile() const { return profile_; }

    // Continuous profile value.
    double value(double x) const {
        if (x < start_ || x > end()) return 0.0;
        if (profile_ == Profile::rectangular) return 1.0 / length_;
        const double s = sigma(), z = (x - center()) / s;
        return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi) * truncated_mass());
    }

    // Exact integral of the continuous profile over [a, b].
    double integral(double a, double b) const {
        const double lo = std::max(a, start_), hi = std::min(b, end());
        if (hi <= lo) return 0.0;
        if (profile_ == Profile::rectangular) return (hi - lo) / length_;
        const double s = sigma() * std::numbers::sqrt2;
        return 0.5 * (std::erf((hi - center()) / s) - std::erf((lo - center()) / s)) / truncated_mass();
    }

    // Nodal samples f(x_j) rescaled so that sum_j f_j dx = 1 exactly.
    RealVector sample(const ClockGrid& grid) const {
        RealVector f(grid.points());
        for (Index j = 0; j < grid.points(); ++j) f(j) = value(grid.position(j));
        const double total = f.sum() * grid.dx();
        if (!(total > 0.0)) throw std::invalid_argument("InteractionWindow: no grid point inside the window");
        return f / total;
    }

private:
    double center() const { return start_ + 0.5 * length_; }
    double sigma() const { return length_ / 10.0; }
    static double truncated_mass() { return std::erf(5.0 / std::numbers::sqrt2); }

    double start_;
    double length_;
    Profile profile_;
};

}  // namespace autoclock::clock
