#pragma once

// First-order fluctuation correction of the paraxial propagator and the
// L-symbol couplings between p = 0 LG modes it induces. L symbols are
// available by two independent routes: transverse quadrature with finite
// differences, and the closed-form Gaussian integral of the generating
// function followed by Taylor-coefficient extraction.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "oamgrav/beam_optics.hpp"
#include "oamgrav/errors.hpp"
#include "oamgrav/quadrature.hpp"
#include "oamgrav/taylor_series.hpp"

namespace oamgrav {

/// Diagonal metric perturbations at one axial position.
struct MetricPoint {
    double h00 = 0.0;
    double h11 = 0.0;
    double h22 = 0.0;
    double h33 = 0.0;

    /// Throws unless every component is finite with |h| < 1.
    void validate() const {
        for (double v : {h00, h11, h22, h33})
            if (!std::isfinite(v) || std::abs(v) >= 1.0)
                throw InvalidArgument("MetricPoint: components must be finite with |h| < 1");
    }
};

/// A complex field sampled on a uniform square grid; flat index i*n + j
/// addresses (x_i, y_j).
struct TransverseField {
    std::vector<cdouble> values;
    std::size_t nodes_per_axis = 0;
    double spacing = 0.0;
};

namespace detail {

// 5-point centred second difference along one axis; samples beyond the
// grid edge are treated as zero.
inline cdouble second_difference(const TransverseField& f, std::size_t i, std::size_t j, bool along_x) {
    const std::size_t n = f.nodes_per_axis;
    const auto at = [&](long di) -> cdouble {
        const long ii = static_cast<long>(along_x ? i : j) + di;
        if (ii < 0 || ii >= static_cast<long>(n)) return {};
        const std::size_t u = static_cast<std::size_t>(ii);
        return along_x ? f.values[u * n + j] : f.values[i * n + u];
    };
    return (-at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2)) / (12.0 * f.spacing * f.spacing);
}

}  // namespace detail

/// (2i)^-1 k (h00 + h33) T + (2ik)^-1 [(h33 - h11) d1^2 T + (h33 - h22) d2^2 T].
inline TransverseField apply_fluctuation_derivative(const TransverseField& field, const MetricPoint& h,
                                                    const BeamParameters& beam) {
    if (field.nodes_per_axis < 5) throw InvalidArgument("apply_fluctuation_derivative: grid too small (< 5 nodes per axis)");
    if (field.values.size() != field.nodes_per_axis * field.nodes_per_axis || !(field.spacing > 0.0))
        throw InvalidArgument("apply_fluctuation_derivative: malformed field");
    const double k = beam.k();
    const cdouble potential = cdouble(0.0, -0.5 * k) * (h.h00 + h.h33);
    const cdouble kinetic = cdouble(0.0, -0.5 / k);
    const double cx = h.h33 - h.h11;
    const double cy = h.h33 - h.h22;
    TransverseField out{std::vector<cdouble>(field.values.size()), field.nodes_per_axis, field.spacing};
    const std::size_t n = field.nodes_per_axis;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cdouble v = potential * field.values[i * n + j];
            if (cx != 0.0) v += kinetic * cx * detail::second_difference(field, i, j, true);
            if (cy != 0.0) v += kinetic * cy * detail::second_difference(field, i, j, false);
            out.values[i * n + j] = v;
        }
    return out;
}

/// Matrix of L_{n,s} for |n|, |s| <= M; entry (n + M, s + M).
struct LSymbolMatrix {
    int max_l = 0;
    double z = 0.0;
    MetricPoint h;
    Eigen::MatrixXcd values;

    cdouble at(int n, int s) const { return values(n + max_l, s + max_l); }
};

namespace detail {

inline TransverseField sample_conjugate_field(int l, double z, const BeamParameters& beam,
                                              const TransverseQuadrature& quad) {
    TransverseField f{sample_mode(ModeIndex(l, 0), z, beam, quad), quad.nodes_per_axis(), quad.spacing()};
    for (auto& v : f.values) v = std::conj(v);
    return f;
}

inline void require_fd_quadrature(const TransverseQuadrature& quad, double z, const BeamParameters& beam) {
    if (!quad.supports_finite_differences())
        throw InvalidArgument("L-symbol quadrature needs a uniform (finite-difference) transverse grid");
    quad.require_valid_for(beam_geometry(beam, z).width);
}

inline cdouble weighted_sum(const std::vector<cdouble>& f, const std::vector<cdouble>& g,
                            const TransverseQuadrature& quad) {
    cdouble sum{};
    for (std::size_t i = 0; i < f.size(); ++i) sum += quad.weight(i) * f[i] * g[i];
    return sum;
}

}  // namespace detail

/// L_{n,s} = integral of LG_n * d3^(F) conj(LG_s) over the transverse plane,
/// by quadrature on a uniform grid with finite-difference derivatives.
inline cdouble l_symbol_quadrature(int n, int s, const MetricPoint& h, double z, const BeamParameters& beam,
                                   const TransverseQuadrature& quad) {
    h.validate();
    detail::require_fd_quadrature(quad, z, beam);
    const auto lg_n = sample_mode(ModeIndex(n, 0), z, beam, quad);
    const auto image = apply_fluctuation_derivative(detail::sample_conjugate_field(s, z, beam, quad), h, beam);
    return detail::weighted_sum(lg_n, image.values, quad);
}

inline LSymbolMatrix l_symbol_matrix_quadrature(int max_l, const MetricPoint& h, double z, const BeamParameters& beam,
                                                const TransverseQuadrature& quad) {
    if (max_l < 0) throw InvalidArgument("l_symbol_matrix_quadrature: max_l must be non-negative");
    h.validate();
    detail::require_fd_quadrature(quad, z, beam);
    const int d = 2 * max_l + 1;
    std::vector<std::vector<cdouble>> modes;
    std::vector<TransverseField> images;
    for (int l = -max_l; l <= max_l; ++l) {
        modes.push_back(sample_mode(ModeIndex(l, 0), z, beam, quad));
        images.push_back(apply_fluctuation_derivative(detail::sample_conjugate_field(l, z, beam, quad), h, beam));
    }
    LSymbolMatrix m{max_l, z, h, Eigen::MatrixXcd(d, d)};
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) m.values(a, b) = detail::weighted_sum(modes[a], images[b].values, quad);
    return m;
}

/// The k-proportional (potential) and 1/k (diffractive) contributions to one L symbol.
struct LSymbolParts {
    cdouble potential;
    cdouble kinetic;

    cdouble total() const { return potential + kinetic; }
};

namespace detail {

// Coefficient prefactor N (sqrt 2)^|l| |l|! for a p = 0 mode.
inline double generating_scale(int l) {
    const int al = std::abs(l);
    return lg_normalization(ModeIndex(l, 0)) * std::pow(std::sqrt(2.0), al) * std::exp(log_factorial(al));
}

// Generating-function route without the |h| < 1 check; linear in h.
inline LSymbolParts l_symbol_parts_unchecked(int n, int s, const MetricPoint& h, double z,
                                             const BeamParameters& beam) {
    const int an = std::abs(n);
    const int as = std::abs(s);
    if (an > kMaxGeneratingOrder || as > kMaxGeneratingOrder)
        throw OrderCapExceeded("l_symbol_generating: |n| or |s| exceeds the cap " +
                               std::to_string(kMaxGeneratingOrder));
    const auto no = static_cast<std::size_t>(an);
    const auto ni = static_cast<std::size_t>(as);
    const cdouble omega = generating_omega(0.0, z, beam);
    require_regular_omega(omega);
    const cdouble inv = 1.0 / omega;
    const cdouble inv_bar = std::conj(inv);
    const cdouble i{0.0, 1.0};

    // Everything below is measured in units of w0. The outer series variable
    // belongs to mode n (a if n > 0, b if n < 0); the inner one to the
    // conjugated mode s.
    const ComplexSeries2 zero = bivariate_constant(no, ni, 0.0);
    const ComplexSeries2 t1 = outer_variable(no, ni);
    const ComplexSeries2 t2 = inner_variable(no, ni);
    const ComplexSeries2& a1 = n > 0 ? t1 : zero;
    const ComplexSeries2& b1 = n < 0 ? t1 : zero;
    const ComplexSeries2& a2 = s > 0 ? t2 : zero;
    const ComplexSeries2& b2 = s < 0 ? t2 : zero;

    // exponent of G_n conj(G_s): -gamma r^2 + u x + v y
    const double gamma = 2.0 * inv.real();
    const ComplexSeries2 u = (a1 + b1) * inv + (a2 + b2) * inv_bar;
    const ComplexSeries2 v = (a1 - b1) * (i * inv) + (b2 - a2) * (i * inv_bar);
    const ComplexSeries2 gauss =
        exp((u * u + v * v) / (4.0 * gamma)) * (std::numbers::pi / gamma * (inv * inv_bar).real());

    // d^2/dx^2 exp(Q) = (Q_xx + Q_x^2) exp(Q), averaged over the Gaussian weight
    const double variance = 1.0 / (2.0 * gamma);
    const cdouble q = 2.0 * inv_bar;
    const ComplexSeries2 px = (a2 + b2) * inv_bar - u * (q / (2.0 * gamma));
    const ComplexSeries2 py = (b2 - a2) * (i * inv_bar) - v * (q / (2.0 * gamma));
    const cdouble curvature = q * q * variance - q;
    const ComplexSeries2 ex = px * px + curvature;
    const ComplexSeries2 ey = py * py + curvature;

    const double k = beam.k();
    const double w0 = beam.w0();
    const cdouble potential_factor = cdouble(0.0, -0.5 * k) * (h.h00 + h.h33);
    const cdouble kinetic_factor = cdouble(0.0, -0.5 / (k * w0 * w0));
    const ComplexSeries2 kinetic = gauss * (ex * (h.h33 - h.h11) + ey * (h.h33 - h.h22));

    const double scale = generating_scale(n) * generating_scale(s);
    return {scale * potential_factor * gauss[no][ni], scale * kinetic_factor * kinetic[no][ni]};
}

}  // namespace detail

/// Both contributions to L_{n,s} from the generating-function route.
inline LSymbolParts l_symbol_generating_parts(int n, int s, const MetricPoint& h, double z,
                                              const BeamParameters& beam) {
    h.validate();
    return detail::l_symbol_parts_unchecked(n, s, h, z, beam);
}

inline cdouble l_symbol_generating(int n, int s, const MetricPoint& h, double z, const BeamParameters& beam) {
    return l_symbol_generating_parts(n, s, h, z, beam).total();
}

/// Full matrix (or only its diagonal) by the generating-function route.
inline LSymbolMatrix l_symbol_matrix_generating(int max_l, const MetricPoint& h, double z, const BeamParameters& beam,
                                                bool diagonal_only = false) {
    if (max_l < 0) throw InvalidArgument("l_symbol_matrix_generating: max_l must be non-negative");
    h.validate();
    const int d = 2 * max_l + 1;
    LSymbolMatrix m{max_l, z, h, Eigen::MatrixXcd::Zero(d, d)};
    for (int n = -max_l; n <= max_l; ++n)
        for (int s = -max_l; s <= max_l; ++s)
            if (!diagonal_only || n == s)
                m.values(n + max_l, s + max_l) = detail::l_symbol_parts_unchecked(n, s, h, z, beam).total();
    return m;
}

/// L(h) = sum_mu h_mu B_mu. The four matrices B_mu (h00, h11, h22, h33) let
/// stochastic integration form L symbols from sampled h with four
/// multiply-adds per entry.
struct LSymbolBasis {
    int max_l = 0;
    double z = 0.0;
    std::array<Eigen::MatrixXcd, 4> components;

    Eigen::MatrixXcd evaluate(const MetricPoint& h) const {
        return h.h00 * components[0] + h.h11 * components[1] + h.h22 * components[2] + h.h33 * components[3];
    }
};

inline LSymbolBasis l_symbol_basis(int max_l, double z, const BeamParameters& beam, bool diagonal_only) {
    if (max_l < 0) throw InvalidArgument("l_symbol_basis: max_l must be non-negative");
    const int d = 2 * max_l + 1;
    LSymbolBasis basis{max_l, z, {}};
    for (int mu = 0; mu < 4; ++mu) {
        MetricPoint unit;
        (mu == 0 ? unit.h00 : mu == 1 ? unit.h11 : mu == 2 ? unit.h22 : unit.h33) = 1.0;
        Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(d, d);
        for (int n = -max_l; n <= max_l; ++n)
            for (int s = -max_l; s <= max_l; ++s)
                if (!diagonal_only || n == s)
                    b(n + max_l, s + max_l) = detail::l_symbol_parts_unchecked(n, s, unit, z, beam).total();
        basis.components[static_cast<std::size_t>(mu)] = std::move(b);
    }
    return basis;
}

/// Generator of the two-photon density-matrix equation of motion,
///   (G rho)_{l1 l2, j1 j2} = L1*_{l1,m} rho_{m l2, j1 j2} + L2*_{l2,m} rho_{l1 m, j1 j2}
///                          + L1_{j1,n} rho_{l1 l2, n j2} + L2_{j2,n} rho_{l1 l2, j1 n},
/// where L1 and L2 are the L symbols seen by photon 1 and photon 2. Rows and
/// columns of rho use the index (l1 + M) * D + (l2 + M).
class EomGenerator {
public:
    EomGenerator(Eigen::MatrixXcd beam1, Eigen::MatrixXcd beam2, bool diagonal_only)
        : l1_(std::move(beam1)), l2_(std::move(beam2)), diagonal_only_(diagonal_only) {
        if (l1_.rows() != l1_.cols() || l1_.rows() % 2 == 0 || l1_.rows() != l2_.rows() || l2_.rows() != l2_.cols())
            throw InvalidArgument("EomGenerator: L-symbol matrices must be square, odd-sized and equal in size");
        max_l_ = static_cast<int>(l1_.rows() / 2);
        if (diagonal_only_) {
            l1_ = Eigen::MatrixXcd(l1_.diagonal().asDiagonal());
            l2_ = Eigen::MatrixXcd(l2_.diagonal().asDiagonal());
        }
    }

    int max_l() const { return max_l_; }
    int dimension() const { return 2 * max_l_ + 1; }
    bool diagonal_only() const { return diagonal_only_; }
    const Eigen::MatrixXcd& beam1() const { return l1_; }
    const Eigen::MatrixXcd& beam2() const { return l2_; }

    /// Rate multiplying rho_{l1 l2, j1 j2} under the diagonal-only generator.
    cdouble diagonal_rate(int l1, int l2, int j1, int j2) const {
        const int m = max_l_;
        return std::conj(l1_(l1 + m, l1 + m)) + std::conj(l2_(l2 + m, l2 + m)) + l1_(j1 + m, j1 + m) +
               l2_(j2 + m, j2 + m);
    }

    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const {
        const int d = dimension();
        if (rho.rows() != d * d || rho.cols() != d * d) throw InvalidArgument("EomGenerator: density matrix size mismatch");
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d * d, d * d);
        if (diagonal_only_) {
            for (int a1 = 0; a1 < d; ++a1)
                for (int a2 = 0; a2 < d; ++a2)
                    for (int b1 = 0; b1 < d; ++b1)
                        for (int b2 = 0; b2 < d; ++b2) {
                            const cdouble rate =
                                std::conj(l1_(a1, a1)) + std::conj(l2_(a2, a2)) + l1_(b1, b1) + l2_(b2, b2);
                            out(a1 * d + a2, b1 * d + b2) = rate * rho(a1 * d + a2, b1 * d + b2);
                        }
            return out;
        }
        const Eigen::MatrixXcd c1 = l1_.conjugate();
        const Eigen::MatrixXcd c2 = l2_.conjugate();
        for (int a1 = 0; a1 < d; ++a1)
            for (int a2 = 0; a2 < d; ++a2)
                for (int b1 = 0; b1 < d; ++b1)
                    for (int b2 = 0; b2 < d; ++b2) {
                        cdouble acc{};
                        for (int m = 0; m < d; ++m) {
                            acc += c1(a1, m) * rho(m * d + a2, b1 * d + b2);
                            acc += c2(a2, m) * rho(a1 * d + m, b1 * d + b2);
                            acc += l1_(b1, m) * rho(a1 * d + a2, m * d + b2);
                            acc += l2_(b2, m) * rho(a1 * d + a2, b1 * d + m);
                        }
                        out(a1 * d + a2, b1 * d + b2) = acc;
                    }
        return out;
    }

private:
    Eigen::MatrixXcd l1_;
    Eigen::MatrixXcd l2_;
    bool diagonal_only_;
    int max_l_ = 0;
};

/// Generator at plane z with L symbols from the generating-function route.
inline EomGenerator eom_generator(int max_l, const MetricPoint& h_beam1, const MetricPoint& h_beam2, double z,
                                  const BeamParameters& beam, bool diagonal_only = true) {
    if (max_l < 1) throw InvalidArgument("eom_generator: M must be at least 1");
    return EomGenerator(l_symbol_matrix_generating(max_l, h_beam1, z, beam, diagonal_only).values,
                        l_symbol_matrix_generating(max_l, h_beam2, z, beam, diagonal_only).values, diagonal_only);
}

}  // namespace oamgrav
