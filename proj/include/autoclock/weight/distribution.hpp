// distribution.hpp: weight momentum distribution as weighted quadrature nodes.

#pragma once

#include "autoclock/core/operator.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace autoclock::weight {

struct WeightNode {
    double p{0.0};
    double w{0.0};
};

class WeightDistribution {
public:
    // Nodes in any order; stored sorted by momentum. p0 is the first moment.
    explicit WeightDistribution(std::vector<WeightNode> nodes) : nodes_(std::move(nodes)) {
        if (nodes_.empty()) throw std::invalid_argument("WeightDistribution: empty node list");
        double total = 0.0;
        for (const auto& n : nodes_) {
            if (!(n.w >= 0.0) || !std::isfinite(n.p)) throw std::invalid_argument("WeightDistribution: invalid node");
            total += n.w;
        }
        if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("WeightDistribution: weights do not sum to 1");
        std::stable_sort(nodes_.begin(), nodes_.end(), [](const WeightNode& a, const WeightNode& b) { return a.p < b.p; });
        for (const auto& n : nodes_) p0_ += n.w * n.p;
    }

    // Same, additionally checking a declared first moment.
    WeightDistribution(std::vector<WeightNode> nodes, double declared_p0) : WeightDistribution(std::move(nodes)) {
        if (std::abs(p0_ - declared_p0) > 1e-10)
            throw std::invalid_argument("WeightDistribution: declared p0 does not match the first moment");
        p0_ = declared_p0;
    }

    static WeightDistribution delta(double p0) { return WeightDistribution({{p0, 1.0}}, p0); }

    // Probabilists' Gauss-Hermite rule (Golub-Welsch) scaled to N(p0, sigma^2); nodes
    // farther than `cutoff` standard deviations are dropped and the rest renormalized.
    static WeightDistribution gaussian(double p0, double sigma, int points = 41, double cutoff = 6.0) {
        if (!(sigma > 0.0)) throw std::invalid_argument("WeightDistribution::gaussian: sigma must be positive");
        if (points < 1) throw std::invalid_argument("WeightDistribution::gaussian: need at least one node");
        Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
        for (int k = 1; k < points; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
        std::vector<WeightNode> nodes;
        double total = 0.0;
        for (int k = 0; k < points; ++k) {
            const double x = es.eigenvalues()(k);
            if (std::abs(x) > cutoff) continue;
            const double w = es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
            nodes.push_back({x, w});
            total += w;
        }
        // Symmetric rule: the mean is p0 up to rounding, so pin it exactly.
        for (auto& n : nodes) {
            n.p = p0 + sigma * n.p;
            n.w /= total;
        }
        WeightDistribution d(std::move(nodes));
        d.p0_ = p0;
        return d;
    }

    const std::vector<WeightNode>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    double p0() const { return p0_; }

    double width() const {
        double v = 0.0;
        for (const auto& n : nodes_) v += n.w * (n.p - p0_) * (n.p - p0_);
        return std::sqrt(v);
    }

    RealVector weights() const {
        RealVector w(static_cast<Index>(nodes_.size()));
        for (std::size_t i = 0; i < nodes_.size(); ++i) w(static_cast<Index>(i)) = nodes_[i].w;
        return w;
    }

    // Same weights, all momenta (and p0) shifted by `offset`.
    WeightDistribution shifted(double offset) const {
        WeightDistribution d = *this;
        for (auto& n : d.nodes_) n.p += offset;
        d.p0_ += offset;
        return d;
    }

private:
    friend WeightDistribution rescale_distribution(const WeightDistribution&, double);
    std::vector<WeightNode> nodes_;
    double p0_{0.0};
};

// Narrows mu about its mean: p -> p0 + delta (p - p0), weights unchanged.
inline WeightDistribution rescale_distribution(const WeightDistribution& mu, double delta) {
    if (!(delta > 0.0) || delta > 1.0) throw std::invalid_argument("rescale_distribution: delta must lie in (0, 1]");
    WeightDistribution d = mu;
    for (auto& n : d.nodes_) n.p = mu.p0() + delta * (n.p - mu.p0());
    return d;
}

}  // namespace autoclock::weight
