#pragma once

// Stationary Gaussian sampling of the four diagonal metric perturbations
// h00, h11, h22, h33 along the propagation axis. Each component has
// covariance A^2 exp(-(x - x')^2 / L^2) and the components are independent.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "oamgrav/errors.hpp"

namespace oamgrav {

class FluctuationParameters {
public:
    /// Strength above which the first-order (h << 1) treatment is questionable.
    static constexpr double kWeakFieldWarningThreshold = 0.1;

    FluctuationParameters(double strength, double correlation_length)
        : strength_(strength), correlation_length_(correlation_length) {
        if (!(strength >= 0.0) || !std::isfinite(strength))
            throw InvalidArgument("FluctuationParameters: strength A must be non-negative");
        if (!(correlation_length > 0.0) || !std::isfinite(correlation_length))
            throw InvalidArgument("FluctuationParameters: correlation length L must be positive");
    }

    double strength() const { return strength_; }
    double correlation_length() const { return correlation_length_; }

    /// Non-empty when A exceeds the weak-field threshold.
    std::string warning() const {
        if (strength_ > kWeakFieldWarningThreshold)
            return "fluctuation strength A = " + std::to_string(strength_) +
                   " exceeds 0.1; first-order perturbation theory assumes A << 1";
        return {};
    }

private:
    double strength_;
    double correlation_length_;
};

/// Uniform grid x_i = start + i * spacing, i = 0..count-1.
struct AxialGrid {
    double start = 0.0;
    double spacing = 0.0;
    std::size_t count = 0;

    AxialGrid() = default;
    AxialGrid(double start_, double spacing_, std::size_t count_) : start(start_), spacing(spacing_), count(count_) {
        if (!(spacing > 0.0) || !std::isfinite(spacing)) throw InvalidArgument("AxialGrid: spacing must be positive");
        if (count < 2) throw InvalidArgument("AxialGrid: need at least two points");
    }

    double at(std::size_t i) const { return start + spacing * static_cast<double>(i); }
    double length() const { return spacing * static_cast<double>(count - 1); }
    friend bool operator==(const AxialGrid&, const AxialGrid&) = default;
};

enum class MetricComponent { h00 = 0, h11 = 1, h22 = 2, h33 = 3 };

inline const char* component_name(MetricComponent c) {
    static constexpr std::array<const char*, 4> names{"h00", "h11", "h22", "h33"};
    return names[static_cast<std::size_t>(c)];
}

/// One stochastic realization of the on-axis metric perturbation.
struct MetricTrajectory {
    AxialGrid grid;
    std::array<std::vector<double>, 4> components;  // indexed by MetricComponent
    std::uint64_t seed = 0;

    const std::vector<double>& operator[](MetricComponent c) const {
        return components[static_cast<std::size_t>(c)];
    }
    std::size_t size() const { return grid.count; }

    /// Columns x3,h00,h11,h22,h33.
    void write_csv(std::ostream& os) const {
        os.precision(17);
        os << "x3,h00,h11,h22,h33\n";
        for (std::size_t i = 0; i < grid.count; ++i) {
            os << grid.at(i);
            for (const auto& c : components) os << ',' << c[i];
            os << '\n';
        }
    }
};

/// Symmetric square root S of the unit-variance kernel matrix
/// C_ij = exp(-(x_i - x_j)^2 / L^2), so that S S = C. Negative eigenvalues
/// down to -1e-12 (rounding on a numerically rank-deficient kernel) are
/// clipped to zero; anything more negative is a hard error.
class CovarianceFactor {
public:
    static constexpr std::size_t kMaxDensePoints = 4096;

    CovarianceFactor(const AxialGrid& grid, double correlation_length) : grid_(grid), correlation_length_(correlation_length) {
        if (grid.count > kMaxDensePoints)
            throw InvalidArgument("CovarianceFactor: grid exceeds the dense limit of 4096 points");
        if (grid.spacing > correlation_length / 4.0 * (1.0 + 1e-12))
            throw InvalidArgument("grid too coarse: spacing " + std::to_string(grid.spacing) +
                                  " exceeds L/4 = " + std::to_string(correlation_length / 4.0));
        const auto n = static_cast<Eigen::Index>(grid.count);
        Eigen::MatrixXd cov(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const double d = (grid.at(static_cast<std::size_t>(i)) - grid.at(static_cast<std::size_t>(j))) /
                                 correlation_length;
                cov(i, j) = std::exp(-d * d);
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        if (es.info() != Eigen::Success) throw NumericalError("CovarianceFactor: eigendecomposition failed");
        Eigen::VectorXd lambda = es.eigenvalues();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (lambda(i) < -1e-12) throw NumericalError("CovarianceFactor: kernel matrix is not positive semidefinite");
            lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
        }
        root_ = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
        residual_ = (root_ * root_ - cov).norm() / cov.norm();
    }

    const AxialGrid& grid() const { return grid_; }
    double correlation_length() const { return correlation_length_; }
    const Eigen::MatrixXd& root() const { return root_; }
    /// ||S S - C||_F / ||C||_F.
    double residual() const { return residual_; }

private:
    AxialGrid grid_;
    double correlation_length_;
    Eigen::MatrixXd root_;
    double residual_;
};

/// Draws trajectories for fixed (grid, parameters); the factorization is
/// built once and shared read-only, so sample() may be called concurrently.
class TrajectorySampler {
public:
    TrajectorySampler(const FluctuationParameters& params, const AxialGrid& grid)
        : params_(params), factor_(std::make_shared<const CovarianceFactor>(grid, params.correlation_length())) {}

    const FluctuationParameters& parameters() const { return params_; }
    const AxialGrid& grid() const { return factor_->grid(); }
    const CovarianceFactor& factor() const { return *factor_; }

    MetricTrajectory sample(std::uint64_t seed) const {
        MetricTrajectory t;
        t.grid = grid();
        t.seed = seed;
        const auto n = static_cast<Eigen::Index>(grid().count);
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6d657472u};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd white(n);
        for (auto& component : t.components) {
            for (Eigen::Index i = 0; i < n; ++i) white(i) = normal(rng);
            if (params_.strength() == 0.0) {
                component.assign(grid().count, 0.0);
                continue;
            }
            const Eigen::VectorXd colored = params_.strength() * (factor_->root() * white);
            component.assign(colored.data(), colored.data() + n);
        }
        return t;
    }

private:
    FluctuationParameters params_;
    std::shared_ptr<const CovarianceFactor> factor_;
};

inline MetricTrajectory sample_trajectory(const FluctuationParameters& params, const AxialGrid& grid,
                                          std::uint64_t seed) {
    return TrajectorySampler(params, grid).sample(seed);
}

struct CorrelationEstimate {
    double estimate;
    double standard_error;
};

/// Ensemble estimate of <h_a(x) h_b(x + lag)>. Each trajectory contributes
/// its spatial average over all admissible x; the standard error is taken
/// across trajectories, which are independent.
inline CorrelationEstimate empirical_autocorrelation(const std::vector<MetricTrajectory>& trajectories,
                                                     MetricComponent a, MetricComponent b, double lag) {
    if (trajectories.size() < 100)
        throw InvalidArgument("empirical_autocorrelation: need at least 100 trajectories, got " +
                              std::to_string(trajectories.size()));
    const AxialGrid& grid = trajectories.front().grid;
    const double steps_real = lag / grid.spacing;
    const auto steps = static_cast<std::size_t>(std::llround(steps_real));
    if (lag < 0.0 || std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * std::max(1.0, steps_real) ||
        steps >= grid.count)
        throw InvalidArgument("empirical_autocorrelation: lag is not representable on the grid");

    const double n = static_cast<double>(trajectories.size());
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& t : trajectories) {
        if (!(t.grid == grid)) throw InvalidArgument("empirical_autocorrelation: trajectories use different grids");
        const auto& ha = t[a];
        const auto& hb = t[b];
        double acc = 0.0;
        for (std::size_t i = 0; i + steps < grid.count; ++i) acc += ha[i] * hb[i + steps];
        const double v = acc / static_cast<double>(grid.count - steps);
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double var = std::max(sum_sq / n - mean * mean, 0.0) * n / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

inline CorrelationEstimate empirical_autocorrelation(const std::vector<MetricTrajectory>& trajectories,
                                                     MetricComponent component, double lag) {
    return empirical_autocorrelation(trajectories, component, component, lag);
}

}  // namespace oamgrav
