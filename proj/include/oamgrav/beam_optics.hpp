#pragma once

// Laguerre-Gaussian modes of a paraxial beam, their generating function, and
// overlap integrals over the transverse plane.

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "oamgrav/errors.hpp"
#include "oamgrav/quadrature.hpp"
#include "oamgrav/taylor_series.hpp"

namespace oamgrav {

using cdouble = std::complex<double>;

/// Highest derivative order |l| + 2p accepted by the generating-function path.
inline constexpr int kMaxGeneratingOrder = 24;

/// Thrown when a generating-function extraction would exceed kMaxGeneratingOrder.
class OrderCapExceeded : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Azimuthal index l (topological charge) and radial index p of an LG mode.
struct ModeIndex {
    int l = 0;
    int p = 0;

    ModeIndex() = default;
    ModeIndex(int l_, int p_ = 0) : l(l_), p(p_) {
        if (p < 0) throw InvalidArgument("ModeIndex: radial index p must be non-negative");
    }

    int abs_l() const { return std::abs(l); }
    friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

class BeamParameters {
public:
    /// k is the wavenumber, w0 the waist radius; the waist sits at z = 0.
    BeamParameters(double k, double w0) : k_(k), w0_(w0) {
        if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("BeamParameters: k must be positive");
        if (!(w0 > 0.0) || !std::isfinite(w0)) throw InvalidArgument("BeamParameters: w0 must be positive");
        z_r_ = k_ * w0_ * w0_ / 2.0;
    }

    double k() const { return k_; }
    double w0() const { return w0_; }
    double rayleigh_range() const { return z_r_; }

private:
    double k_;
    double w0_;
    double z_r_;
};

struct BeamGeometry {
    double width;  // w(z)
    /// Wavefront curvature radius R(z); empty on the flat wavefront at z = 0.
    std::optional<double> curvature_radius;
    /// arctan(z/zR); the mode's Gouy phase is -(|l| + 2p + 1) times this.
    double gouy_base;

    bool flat_wavefront() const { return !curvature_radius.has_value(); }
};

inline BeamGeometry beam_geometry(const BeamParameters& beam, double z) {
    const double zr = beam.rayleigh_range();
    const double ratio = z / zr;
    BeamGeometry g{beam.w0() * std::sqrt(1.0 + ratio * ratio), std::nullopt, std::atan(ratio)};
    if (z != 0.0) g.curvature_radius = z * (1.0 + (zr / z) * (zr / z));
    return g;
}

namespace detail {

inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

/// Generalised Laguerre polynomial L_p^alpha(x) by upward recurrence.
inline double laguerre(int p, double alpha, double x) {
    if (p == 0) return 1.0;
    double prev = 1.0;
    double cur = 1.0 + alpha - x;
    for (int n = 1; n < p; ++n) {
        const double next = ((2.0 * n + 1.0 + alpha - x) * cur - (n + alpha) * prev) / (n + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

}  // namespace detail

/// N = sqrt(2 p! / (pi (|l| + p)!)).
inline double lg_normalization(const ModeIndex& mode) {
    const double log_ratio = detail::log_factorial(mode.p) - detail::log_factorial(mode.abs_l() + mode.p);
    return std::sqrt(2.0 / std::numbers::pi * std::exp(log_ratio));
}

/// Closed-form LG_{l,p}(x, y, z).
inline cdouble evaluate_lg(const ModeIndex& mode, double x, double y, double z, const BeamParameters& beam) {
    const BeamGeometry g = beam_geometry(beam, z);
    const double w = g.width;
    const double r2 = x * x + y * y;
    const int al = mode.abs_l();
    const double radial = std::pow(std::sqrt(2.0 * r2) / w, al) * detail::laguerre(mode.p, al, 2.0 * r2 / (w * w));
    if (radial == 0.0) return {0.0, 0.0};
    const double phi = std::atan2(y, x);
    const double curvature = g.flat_wavefront() ? 0.0 : beam.k() * r2 / (2.0 * *g.curvature_radius);
    const double gouy = -(al + 2.0 * mode.p + 1.0) * g.gouy_base;
    const double phase = mode.l * phi + curvature + gouy;
    return lg_normalization(mode) / w * radial * std::exp(-r2 / (w * w)) * std::polar(1.0, phase);
}

/// Omega(z, c) = 1 - c + i z/zR + i c z/zR.
inline cdouble generating_omega(cdouble c, double z, const BeamParameters& beam) {
    const double zeta = z / beam.rayleigh_range();
    return 1.0 - c + cdouble(0.0, zeta) + c * cdouble(0.0, zeta);
}

inline void require_regular_omega(cdouble omega) {
    if (std::abs(omega) < 1e-12) throw NumericalError("generating function: Omega(z, c) is singular");
}

/// Generating function G(a, b, c) of the LG family evaluated at (x, y, z).
inline cdouble generating_function_value(cdouble a, cdouble b, cdouble c, double x, double y, double z,
                                         const BeamParameters& beam) {
    const cdouble omega = generating_omega(c, z, beam);
    require_regular_omega(omega);
    const double w0 = beam.w0();
    const cdouble exponent =
        (cdouble(x, y) * a * w0 + cdouble(x, -y) * b * w0 - (1.0 + c) * (x * x + y * y)) / (w0 * w0 * omega);
    return std::exp(exponent) / omega;
}

/// LG_{l,p} built from the generating function: the mixed Taylor coefficient
/// [a^|l| c^p] (or b for l < 0) is extracted with truncated-series arithmetic
/// and rescaled by N (sqrt 2)^|l| |l|! / w0.
inline cdouble generate_mode_from_gf(const ModeIndex& mode, double x, double y, double z,
                                     const BeamParameters& beam) {
    const int al = mode.abs_l();
    if (al + 2 * mode.p > kMaxGeneratingOrder)
        throw OrderCapExceeded("generate_mode_from_gf: |l| + 2p = " + std::to_string(al + 2 * mode.p) +
                               " exceeds the cap " + std::to_string(kMaxGeneratingOrder));
    const std::size_t na = static_cast<std::size_t>(al);
    const std::size_t nc = static_cast<std::size_t>(mode.p);
    const double xi = x / beam.w0();
    const double eta = y / beam.w0();
    const double zeta = z / beam.rayleigh_range();

    // outer variable: a (l >= 0) or b (l < 0); inner variable: c
    const ComplexSeries2 t = outer_variable(na, nc);
    const ComplexSeries2 c = inner_variable(na, nc);
    const ComplexSeries2 omega = bivariate_constant(na, nc, cdouble(1.0, zeta)) + c * cdouble(-1.0, zeta);
    require_regular_omega(omega[0][0]);
    const cdouble transverse = mode.l >= 0 ? cdouble(xi, eta) : cdouble(xi, -eta);
    const ComplexSeries2 numerator = t * transverse - (c + 1.0) * (xi * xi + eta * eta);
    const ComplexSeries2 inv_omega = reciprocal(omega);
    const ComplexSeries2 g = inv_omega * exp(numerator * inv_omega);

    const double scale =
        lg_normalization(mode) * std::pow(std::sqrt(2.0), al) * std::exp(detail::log_factorial(al)) / beam.w0();
    return scale * g[na][nc];
}

/// Samples of one mode on every node of a quadrature rule (flat index order).
inline std::vector<cdouble> sample_mode(const ModeIndex& mode, double z, const BeamParameters& beam,
                                        const TransverseQuadrature& quad) {
    std::vector<cdouble> out(quad.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = evaluate_lg(mode, quad.x(i), quad.y(i), z, beam);
    return out;
}

/// Quadrature of sum_i w_i f_i conj(g_i) for fields sampled on `quad`.
inline cdouble inner_product(const std::vector<cdouble>& f, const std::vector<cdouble>& g,
                             const TransverseQuadrature& quad) {
    cdouble sum{};
    for (std::size_t i = 0; i < f.size(); ++i) sum += quad.weight(i) * f[i] * std::conj(g[i]);
    return sum;
}

/// Overlap integral of LG_m and conj(LG_n) at plane z.
inline cdouble overlap(const ModeIndex& m, const ModeIndex& n, double z, const BeamParameters& beam,
                       const TransverseQuadrature& quad) {
    quad.require_valid_for(beam_geometry(beam, z).width);
    return inner_product(sample_mode(m, z, beam, quad), sample_mode(n, z, beam, quad), quad);
}

}  // namespace oamgrav
