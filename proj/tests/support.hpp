#pragma once

// Hand-rolled generators shared by the property tests.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>

#include "oamgrav/coupling.hpp"
#include "oamgrav/density_matrix.hpp"

namespace testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    oamgrav::MetricPoint metric_point(double scale) {
        return {uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)};
    }

    /// B B^dagger / tr, with B complex Gaussian: Hermitian, PSD, unit trace.
    oamgrav::TwoPhotonDensityMatrix density_matrix(int max_l) {
        const int d = 2 * max_l + 1;
        Eigen::MatrixXcd b(d * d, d * d);
        for (Eigen::Index i = 0; i < b.rows(); ++i)
            for (Eigen::Index j = 0; j < b.cols(); ++j) b(i, j) = {normal(), normal()};
        Eigen::MatrixXcd rho = b * b.adjoint();
        rho /= rho.trace().real();
        rho = 0.5 * (rho + rho.adjoint()).eval();
        return oamgrav::TwoPhotonDensityMatrix(max_l, rho);
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

}  // namespace testing
