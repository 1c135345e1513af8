#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "oamgrav/errors.hpp"

namespace oamgrav {

struct SymmetricEigensystem {
    std::vector<double> values;  // ascending
    Eigen::MatrixXd vectors;     // column i pairs with values[i]; empty unless requested
    int sweeps = 0;
};

inline constexpr int kJacobiMaxSweeps = 100;

/// Cyclic Jacobi rotations on a dense real symmetric matrix. Converged when
/// the off-diagonal Frobenius norm drops below 1e-14 ||A||_F.
inline SymmetricEigensystem jacobi_eigensystem(const Eigen::MatrixXd& matrix, bool want_vectors = true) {
    if (matrix.rows() != matrix.cols()) throw InvalidArgument("jacobi_eigensystem: matrix must be square");
    const Eigen::Index n = matrix.rows();
    const double norm = matrix.norm();
    if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, norm))
        throw InvalidArgument("jacobi_eigensystem: matrix is not symmetric within 1e-12");

    Eigen::MatrixXd a = 0.5 * (matrix + matrix.transpose());
    Eigen::MatrixXd v;
    if (want_vectors) v = Eigen::MatrixXd::Identity(n, n);

    const auto off_norm = [&] {
        double s = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    SymmetricEigensystem out;
    const double target = 1e-14 * norm;
    const double negligible = 1e-18 * norm;
    while (off_norm() > target) {
        if (out.sweeps >= kJacobiMaxSweeps)
            throw NumericalError("jacobi_eigensystem: no convergence after " + std::to_string(kJacobiMaxSweeps) +
                                 " sweeps");
        ++out.sweeps;
        for (Eigen::Index p = 0; p < n - 1; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= negligible) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                if (want_vectors)
                    for (Eigen::Index k = 0; k < n; ++k) {
                        const double vkp = v(k, p), vkq = v(k, q);
                        v(k, p) = c * vkp - s * vkq;
                        v(k, q) = s * vkp + c * vkq;
                    }
            }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
    out.values.reserve(order.size());
    for (Eigen::Index i : order) out.values.push_back(a(i, i));
    if (want_vectors) {
        out.vectors.resize(n, n);
        for (Eigen::Index c = 0; c < n; ++c) out.vectors.col(c) = v.col(order[static_cast<std::size_t>(c)]);
    }
    return out;
}

/// All eigenvalues of a real symmetric matrix, ascending.
inline std::vector<double> eigenvalues_symmetric(const Eigen::MatrixXd& matrix) {
    return jacobi_eigensystem(matrix, false).values;
}

/// Eigenvalues of a complex Hermitian matrix H = X + iY through the real
/// symmetric embedding [[X, -Y], [Y, X]], whose spectrum is that of H with
/// every eigenvalue doubled. Returns the n values of H, ascending.
inline std::vector<double> eigenvalues_hermitian(const Eigen::MatrixXcd& matrix) {
    const Eigen::Index n = matrix.rows();
    if (matrix.cols() != n) throw InvalidArgument("eigenvalues_hermitian: matrix must be square");
    Eigen::MatrixXd embed(2 * n, 2 * n);
    embed.topLeftCorner(n, n) = matrix.real();
    embed.bottomRightCorner(n, n) = matrix.real();
    embed.topRightCorner(n, n) = -matrix.imag();
    embed.bottomLeftCorner(n, n) = matrix.imag();
    const auto doubled = eigenvalues_symmetric(embed);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < doubled.size(); i += 2) values.push_back(0.5 * (doubled[i] + doubled[i + 1]));
    return values;
}

}  // namespace oamgrav
