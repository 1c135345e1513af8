#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "oamgrav/density_matrix.hpp"
#include "oamgrav/errors.hpp"
#include "oamgrav/jacobi_eigen.hpp"

namespace oamgrav {

/// Eigenvalues below this count toward the negativity.
inline constexpr double kNegativeEigenvalueThreshold = -1e-12;

struct MetricsReport {
    double x3 = 0.0;
    double purity = 0.0;
    double negativity = 0.0;
    double trace = 0.0;
    double min_eigenvalue_pt = 0.0;
};

namespace detail {
inline void require_hermitian(const TwoPhotonDensityMatrix& rho, const char* who) {
    const double scale = std::max(1.0, rho.matrix().cwiseAbs().maxCoeff());
    if (rho.hermiticity_error() > 1e-10 * scale) throw InvalidArgument(std::string(who) + ": matrix is not Hermitian");
}
}  // namespace detail

/// tr(rho^2) = sum_ij |rho_ij|^2 for Hermitian rho.
inline double purity(const TwoPhotonDensityMatrix& rho) {
    detail::require_hermitian(rho, "purity");
    return rho.matrix().cwiseAbs2().sum();
}

/// Transpose of the second photon's indices:
/// PT((l1, j2), (j1, l2)) = rho((l1, l2), (j1, j2)).
inline Eigen::MatrixXcd partial_transpose(const TwoPhotonDensityMatrix& rho) {
    const Eigen::Index d = rho.dimension();
    const Eigen::MatrixXcd& m = rho.matrix();
    Eigen::MatrixXcd pt(m.rows(), m.cols());
    for (Eigen::Index a1 = 0; a1 < d; ++a1)
        for (Eigen::Index a2 = 0; a2 < d; ++a2)
            for (Eigen::Index b1 = 0; b1 < d; ++b1)
                for (Eigen::Index b2 = 0; b2 < d; ++b2) pt(a1 * d + b2, b1 * d + a2) = m(a1 * d + a2, b1 * d + b2);
    return pt;
}

/// Spectrum of the partial transpose, ascending. Takes the real Jacobi path
/// when every imaginary part is exactly zero, the doubled real embedding
/// otherwise.
inline std::vector<double> partial_transpose_spectrum(const TwoPhotonDensityMatrix& rho) {
    const Eigen::MatrixXcd pt = partial_transpose(rho);
    if (pt.imag().cwiseAbs().maxCoeff() == 0.0) return eigenvalues_symmetric(pt.real());
    return eigenvalues_hermitian(0.5 * (pt + pt.adjoint()));
}

inline double negativity_from_spectrum(const std::vector<double>& spectrum) {
    double n = 0.0;
    for (double v : spectrum)
        if (v < kNegativeEigenvalueThreshold) n -= v;
    return n;
}

inline double negativity(const TwoPhotonDensityMatrix& rho) {
    detail::require_hermitian(rho, "negativity");
    return negativity_from_spectrum(partial_transpose_spectrum(rho));
}

/// Negativity of the analytically evolved maximally entangled state. Its
/// partial transpose splits into 2x2 blocks {|l,-j>, |j,-l>} with
/// eigenvalues ±exp(-(|l|-|j|)^2 x3/kappa)/D, hence
///   N(x3) = (1/D) sum_{l<j} exp(-2 (|l|-|j|)^2 x3 / kappa).
inline double negativity_blockwise(double x3, int max_l, double kappa) {
    if (max_l < 0) throw InvalidArgument("negativity_blockwise: M must be non-negative");
    if (!(kappa > 0.0)) throw InvalidArgument("negativity_blockwise: kappa must be positive");
    const int d = 2 * max_l + 1;
    double sum = 0.0;
    for (int l = -max_l; l <= max_l; ++l)
        for (int j = l + 1; j <= max_l; ++j) {
            const int g = std::abs(l) - std::abs(j);
            sum += std::exp(-2.0 * g * g * x3 / kappa);
        }
    return sum / d;
}

/// Purity of the same family: (1/D^2) sum_{l,j} exp(-2 C x3 / kappa) with
/// C = 2 (|l|-|j|)^2.
inline double purity_closed_form(double x3, int max_l, double kappa) {
    if (!(kappa > 0.0)) throw InvalidArgument("purity_closed_form: kappa must be positive");
    const int d = 2 * max_l + 1;
    double sum = 0.0;
    for (int l = -max_l; l <= max_l; ++l)
        for (int j = -max_l; j <= max_l; ++j) {
            const int g = std::abs(l) - std::abs(j);
            sum += std::exp(-4.0 * g * g * x3 / kappa);
        }
    return sum / (static_cast<double>(d) * d);
}

/// Distance at which negativity_blockwise falls to 1/e of its initial
/// value. Bisection on [0, 50 kappa] (doubled until the sign changes).
inline double decay_distance(int max_l, double kappa) {
    if (max_l < 1) throw InvalidArgument("decay_distance: M must be at least 1");
    if (!(kappa > 0.0)) throw InvalidArgument("decay_distance: kappa must be positive");
    const double target = negativity_blockwise(0.0, max_l, kappa) / std::exp(1.0);
    // only the l = -j island blocks survive at infinity
    const double asymptote = static_cast<double>(max_l) / (2 * max_l + 1);
    if (!(asymptote < target)) throw NumericalError("decay_distance: negativity never falls to 1/e of its start");

    const auto f = [&](double x) { return negativity_blockwise(x, max_l, kappa) - target; };
    double lo = 0.0, hi = 50.0 * kappa;
    for (int i = 0; f(hi) > 0.0; ++i) {
        if (i > 60) throw NumericalError("decay_distance: failed to bracket the root");
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > 1e-12 * kappa) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline MetricsReport metrics_report(const TwoPhotonDensityMatrix& rho, double x3) {
    detail::require_hermitian(rho, "metrics_report");
    const auto spectrum = partial_transpose_spectrum(rho);
    MetricsReport r;
    r.x3 = x3;
    r.purity = rho.matrix().cwiseAbs2().sum();
    r.negativity = negativity_from_spectrum(spectrum);
    r.trace = rho.trace();
    r.min_eigenvalue_pt = spectrum.empty() ? 0.0 : spectrum.front();
    return r;
}

}  // namespace oamgrav
