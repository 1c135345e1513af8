#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>

#include "oamgrav/errors.hpp"

namespace oamgrav {

/// Two-photon OAM density matrix over azimuthal indices -M..M per photon.
/// Dense (D^2 x D^2) storage with row/column index (l1 + M) * D + (l2 + M).
class TwoPhotonDensityMatrix {
public:
    static constexpr int kMaxM = 12;

    /// Validating constructor: Hermitian, unit trace (1e-12), eigenvalues >= -1e-10.
    TwoPhotonDensityMatrix(int max_l, Eigen::MatrixXcd values) : max_l_(max_l), rho_(std::move(values)) {
        check_size();
        if (hermiticity_error() > 1e-10 * std::max(1.0, rho_.cwiseAbs().maxCoeff()))
            throw InvalidArgument("TwoPhotonDensityMatrix: matrix is not Hermitian");
        if (std::abs(trace() - 1.0) > 1e-12) throw InvalidArgument("TwoPhotonDensityMatrix: trace is not 1");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10)
            throw InvalidArgument("TwoPhotonDensityMatrix: matrix is not positive semidefinite");
    }

    /// No validation; for evolved states whose invariants are checked by the caller.
    static TwoPhotonDensityMatrix unchecked(int max_l, Eigen::MatrixXcd values) {
        TwoPhotonDensityMatrix r(max_l);
        r.rho_ = std::move(values);
        r.check_size();
        return r;
    }

    int max_l() const { return max_l_; }
    int dimension() const { return 2 * max_l_ + 1; }
    int index(int l1, int l2) const {
        if (std::abs(l1) > max_l_ || std::abs(l2) > max_l_) throw InvalidArgument("density matrix index out of range");
        return (l1 + max_l_) * dimension() + (l2 + max_l_);
    }
    std::complex<double> at(int l1, int l2, int j1, int j2) const { return rho_(index(l1, l2), index(j1, j2)); }
    const Eigen::MatrixXcd& matrix() const { return rho_; }

    double trace() const { return rho_.trace().real(); }
    double hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

private:
    explicit TwoPhotonDensityMatrix(int max_l) : max_l_(max_l) {}

    void check_size() const {
        if (max_l_ < 0 || max_l_ > kMaxM) throw InvalidArgument("TwoPhotonDensityMatrix: M must lie in [0, 12]");
        const int d = dimension();
        if (rho_.rows() != d * d || rho_.cols() != d * d)
            throw InvalidArgument("TwoPhotonDensityMatrix: expected a " + std::to_string(d * d) + " x " +
                                  std::to_string(d * d) + " matrix");
    }

    int max_l_;
    Eigen::MatrixXcd rho_;
};

/// sum_{m=-M..M} |m>|-m> / sqrt(D).
inline TwoPhotonDensityMatrix initial_maximally_entangled(int max_l) {
    if (max_l < 1) throw InvalidArgument("initial_maximally_entangled: M must be at least 1");
    if (max_l > TwoPhotonDensityMatrix::kMaxM) throw InvalidArgument("initial_maximally_entangled: M exceeds 12");
    const int d = 2 * max_l + 1;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d * d, d * d);
    const auto idx = [&](int l1, int l2) { return (l1 + max_l) * d + (l2 + max_l); };
    for (int l = -max_l; l <= max_l; ++l)
        for (int j = -max_l; j <= max_l; ++j) rho(idx(l, -l), idx(j, -j)) = 1.0 / d;
    return TwoPhotonDensityMatrix::unchecked(max_l, std::move(rho));
}

}  // namespace oamgrav
