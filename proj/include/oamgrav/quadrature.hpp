#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "oamgrav/errors.hpp"

namespace oamgrav {

/// Gauss-Legendre nodes and weights on [-1, 1], Newton iteration on P_n.
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussLegendreRule gauss_legendre(std::size_t n) {
    if (n < 1) throw InvalidArgument("gauss_legendre: need at least one node");
    GaussLegendreRule rule{std::vector<double>(n), std::vector<double>(n)};
    // P_n(x) and P_{n-1}(x) by the three-term recurrence
    const auto legendre = [n](double x) {
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
            p0 = p1;
            p1 = pk;
        }
        return std::pair{p1, p0};
    };
    const double dn = static_cast<double>(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [pn, pm] = legendre(x);
            const double dx = pn / (dn * (x * pn - pm) / (x * x - 1.0));
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const auto [pn, pm] = legendre(x);
        const double dp = dn * (x * pn - pm) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

/// Tensor-product rule over the square [-half_width, half_width]^2 of the
/// transverse plane. The same 1-D rule is used on both axes; the node for
/// flat index (i, j) is (x = nodes[i], y = nodes[j]) with flat index i*n + j.
class TransverseQuadrature {
public:
    enum class Scheme { GaussLegendre, UniformTrapezoid };

    /// Default: 128 Gauss-Legendre nodes per axis over [-6w, 6w].
    static TransverseQuadrature gauss_legendre(double beam_width, double extent = 6.0, std::size_t nodes = 128) {
        validate(beam_width, extent, nodes, 1);
        const auto rule = oamgrav::gauss_legendre(nodes);
        const double half = extent * beam_width;
        TransverseQuadrature q(Scheme::GaussLegendre, beam_width, extent);
        q.nodes_.resize(nodes);
        q.weights_.resize(nodes);
        for (std::size_t i = 0; i < nodes; ++i) {
            q.nodes_[i] = half * rule.nodes[i];
            q.weights_[i] = half * rule.weights[i];
        }
        return q;
    }

    /// Equispaced trapezoidal rule; the only scheme that supports finite
    /// differences. Spectrally accurate for integrands that vanish at the edges.
    static TransverseQuadrature uniform(double beam_width, double extent = 6.0, std::size_t nodes = 769) {
        validate(beam_width, extent, nodes, 5);
        const double half = extent * beam_width;
        TransverseQuadrature q(Scheme::UniformTrapezoid, beam_width, extent);
        q.spacing_ = 2.0 * half / static_cast<double>(nodes - 1);
        q.nodes_.resize(nodes);
        q.weights_.assign(nodes, q.spacing_);
        for (std::size_t i = 0; i < nodes; ++i) q.nodes_[i] = -half + q.spacing_ * static_cast<double>(i);
        q.weights_.front() *= 0.5;
        q.weights_.back() *= 0.5;
        return q;
    }

    Scheme scheme() const { return scheme_; }
    bool supports_finite_differences() const { return scheme_ == Scheme::UniformTrapezoid; }
    std::size_t nodes_per_axis() const { return nodes_.size(); }
    std::size_t size() const { return nodes_.size() * nodes_.size(); }
    double beam_width() const { return beam_width_; }
    double extent() const { return extent_; }
    double half_width() const { return extent_ * beam_width_; }
    /// Grid spacing of the uniform scheme (0 for Gauss-Legendre).
    double spacing() const { return spacing_; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }

    double x(std::size_t flat) const { return nodes_[flat / nodes_.size()]; }
    double y(std::size_t flat) const { return nodes_[flat % nodes_.size()]; }
    double weight(std::size_t flat) const { return weights_[flat / nodes_.size()] * weights_[flat % nodes_.size()]; }

    /// Integral of the unit-normalised Gaussian (2/(pi w^2)) exp(-2 r^2/w^2) minus one.
    double gaussian_self_test_error(double width) const {
        // the integrand separates, so the 2-D rule is the square of the 1-D sum
        double axis = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            axis += weights_[i] * std::exp(-2.0 * nodes_[i] * nodes_[i] / (width * width));
        const double norm = 2.0 / (std::numbers::pi * width * width);
        return std::abs(norm * axis * axis - 1.0);
    }

    /// Throws NumericalError unless the rule covers ±6·width and integrates
    /// the matching Gaussian to relative error below 1e-10.
    void require_valid_for(double width) const {
        if (half_width() < 6.0 * width * (1.0 - 1e-12))
            throw NumericalError("quadrature extent " + std::to_string(half_width()) + " is below 6 w(z) = " +
                                 std::to_string(6.0 * width));
        const double err = gaussian_self_test_error(width);
        if (!(err < 1e-10))
            throw NumericalError("quadrature Gaussian self-test failed: relative error " + std::to_string(err));
    }

private:
    TransverseQuadrature(Scheme s, double width, double extent) : scheme_(s), beam_width_(width), extent_(extent) {}

    static void validate(double width, double extent, std::size_t nodes, std::size_t min_nodes) {
        if (!(width > 0.0) || !(extent > 0.0)) throw InvalidArgument("quadrature: width and extent must be positive");
        if (nodes < min_nodes) throw InvalidArgument("quadrature: too few nodes per axis");
    }

    Scheme scheme_;
    double beam_width_;
    double extent_;
    double spacing_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

}  // namespace oamgrav
