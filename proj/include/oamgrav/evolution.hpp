#pragma once

// Propagation of two-photon OAM density matrices through metric
// fluctuations: the ensemble-averaged exponential decay law, and a Monte
// Carlo integration of the per-realization equation of motion.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "oamgrav/beam_optics.hpp"
#include "oamgrav/coupling.hpp"
#include "oamgrav/density_matrix.hpp"
#include "oamgrav/errors.hpp"
#include "oamgrav/fluctuation_field.hpp"

namespace oamgrav {

/// kappa = 2 k^2 w0^4 / (3 L A^2); empty when A = 0 (no decoherence).
inline std::optional<double> characteristic_length(const BeamParameters& beam, const FluctuationParameters& fluct) {
    const double a = fluct.strength();
    if (a == 0.0) return std::nullopt;
    const double k = beam.k();
    const double w0 = beam.w0();
    return 2.0 * k * k * std::pow(w0, 4) / (3.0 * fluct.correlation_length() * a * a);
}

/// (|l1| - |j1|)^2 + (|l2| - |j2|)^2.
inline int c_coefficient(int l1, int l2, int j1, int j2) {
    const int d1 = std::abs(l1) - std::abs(j1);
    const int d2 = std::abs(l2) - std::abs(j2);
    return d1 * d1 + d2 * d2;
}

/// Decay law rho(x3) = rho(0) exp(-C x3 / kappa).
class DecayModel {
public:
    /// An empty kappa means infinite characteristic length.
    explicit DecayModel(std::optional<double> kappa) : kappa_(kappa) {
        if (kappa_ && !(*kappa_ > 0.0)) throw InvalidArgument("DecayModel: kappa must be positive");
    }
    DecayModel(const BeamParameters& beam, const FluctuationParameters& fluct)
        : DecayModel(characteristic_length(beam, fluct)) {}

    bool decoheres() const { return kappa_.has_value(); }
    const std::optional<double>& kappa() const { return kappa_; }

    double factor(int l1, int l2, int j1, int j2, double x3) const {
        if (!kappa_) return 1.0;
        const int c = c_coefficient(l1, l2, j1, j2);
        return c == 0 ? 1.0 : std::exp(-c * x3 / *kappa_);
    }

private:
    std::optional<double> kappa_;
};

inline TwoPhotonDensityMatrix evolve_analytic(const TwoPhotonDensityMatrix& rho0, double x3, const DecayModel& model) {
    if (!(x3 >= 0.0)) throw InvalidArgument("evolve_analytic: distance must be non-negative");
    const int m = rho0.max_l();
    const int d = rho0.dimension();
    Eigen::MatrixXcd out = rho0.matrix();
    for (int l1 = -m; l1 <= m; ++l1)
        for (int l2 = -m; l2 <= m; ++l2)
            for (int j1 = -m; j1 <= m; ++j1)
                for (int j2 = -m; j2 <= m; ++j2) {
                    const double f = model.factor(l1, l2, j1, j2, x3);
                    if (f != 1.0) out((l1 + m) * d + (l2 + m), (j1 + m) * d + (j2 + m)) *= f;
                }
    return TwoPhotonDensityMatrix::unchecked(m, std::move(out));
}

/// Exponent of the exact Gaussian ensemble average of exp(i * phase) for
/// the diagonal-only equation of motion: the accumulated phase is linear in
/// the sampled h, so <exp(i Theta)> = exp(-Var(Theta) / 2) with
///   Var(Theta) / 2 = C * 3 A^2 F(x3) / (4 k^2 w0^4),
///   F(x3) = int_0^x3 int_0^x3 exp(-(x - x')^2 / L^2) dx dx'.
/// For x3 >> L this approaches C * (sqrt(pi) / 2) * x3 / kappa.
inline double kernel_dephasing_exponent(int c, double x3, const BeamParameters& beam,
                                        const FluctuationParameters& fluct) {
    const double l = fluct.correlation_length();
    const double s = x3 / l;
    const double f = l * l * (std::sqrt(std::numbers::pi) * s * std::erf(s) + std::exp(-s * s) - 1.0);
    const double a = fluct.strength();
    const double k = beam.k();
    return c * 3.0 * a * a * f / (4.0 * k * k * std::pow(beam.w0(), 4));
}

struct MonteCarloSettings {
    double grid_spacing = 0.0;  // sampling step of the metric trajectories
    std::size_t realizations = 0;
    std::uint64_t base_seed = 0;
    bool diagonal_only = true;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct MonteCarloSnapshot {
    double x3 = 0.0;
    Eigen::MatrixXcd mean;
    /// Standard error of the mean; real and imaginary parts estimated separately.
    Eigen::MatrixXcd standard_error;
};

struct MonteCarloResult {
    std::vector<MonteCarloSnapshot> snapshots;  // one per requested distance, same order
    double step = 0.0;                          // Runge-Kutta step actually used
    double max_trace_error = 0.0;               // over all realizations and steps
    double max_hermiticity_error = 0.0;         // over all realizations, at snapshots
    double max_population_drift = 0.0;          // |rho_{l1 l2, l1 l2}(x) - rho(0)|
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of the trajectory seen by `photon` (1 or 2) in realization r.
inline std::uint64_t realization_seed(std::uint64_t base, std::size_t r, int photon) {
    return splitmix64(splitmix64(base) ^ (2 * static_cast<std::uint64_t>(r) + static_cast<std::uint64_t>(photon)));
}

struct ChunkSums {
    std::vector<Eigen::MatrixXcd> sum;
    std::vector<Eigen::MatrixXd> sum_sq_re;
    std::vector<Eigen::MatrixXd> sum_sq_im;
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double max_population_drift = 0.0;
};

}  // namespace detail

/// Integrates d(rho)/dx3 = G(x3) rho per realization with classical RK4,
/// taking two independent metric trajectories (one per photon), and returns
/// ensemble means with standard errors at each requested distance.
///
/// The trajectories are sampled at `grid_spacing`; one RK4 step spans two
/// samples so that the midpoint evaluation uses a sampled value. The step is
/// shrunk so that the largest distance is an integer number of steps; every
/// other distance must land on that grid.
inline MonteCarloResult evolve_monte_carlo_path(const TwoPhotonDensityMatrix& rho0, std::vector<double> distances,
                                                const BeamParameters& beam, const FluctuationParameters& fluct,
                                                const MonteCarloSettings& settings) {
    if (distances.empty()) throw InvalidArgument("evolve_monte_carlo: no distances requested");
    if (!std::is_sorted(distances.begin(), distances.end()) || distances.front() < 0.0)
        throw InvalidArgument("evolve_monte_carlo: distances must be non-negative and ascending");
    if (settings.realizations < 100)
        throw RegimeError("evolve_monte_carlo: need at least 100 realizations, got " +
                          std::to_string(settings.realizations));
    const double corr = fluct.correlation_length();
    if (!(settings.grid_spacing > 0.0) || settings.grid_spacing > corr / 4.0 * (1.0 + 1e-12))
        throw RegimeError("evolve_monte_carlo: grid spacing must be positive and at most L/4");
    const auto kappa = characteristic_length(beam, fluct);
    if (kappa && settings.grid_spacing > *kappa / 100.0 * (1.0 + 1e-12))
        throw RegimeError("evolve_monte_carlo: grid spacing must be at most kappa/100");
    for (double x : distances)
        if (x > 0.0 && x < 10.0 * corr)
            throw RegimeError("evolve_monte_carlo: distance " + std::to_string(x) +
                              " is not much greater than the correlation length (need x3 >= 10 L)");

    const int m = rho0.max_l();
    const int d = rho0.dimension();
    const Eigen::Index dim = static_cast<Eigen::Index>(d) * d;
    const double x_max = distances.back();

    std::size_t total_steps = 0;
    double step = 2.0 * settings.grid_spacing;
    if (x_max > 0.0) {
        total_steps = static_cast<std::size_t>(std::ceil(x_max / step - 1e-9));
        step = x_max / static_cast<double>(total_steps);
    }
    std::vector<std::size_t> checkpoint_steps;
    for (double x : distances) {
        const double s = x / step;
        const double r = std::round(s);
        if (std::abs(s - r) > 1e-9 * std::max(1.0, s))
            throw InvalidArgument("evolve_monte_carlo: distance " + std::to_string(x) +
                                  " does not fall on the integration grid (step " + std::to_string(step) + ")");
        checkpoint_steps.push_back(static_cast<std::size_t>(r));
    }

    MonteCarloResult result;
    result.step = step;
    const std::size_t n_snap = distances.size();

    if (total_steps == 0 || fluct.strength() == 0.0) {
        // nothing to integrate: every realization reproduces rho0
        for (double x : distances)
            result.snapshots.push_back({x, rho0.matrix(), Eigen::MatrixXcd::Zero(dim, dim)});
        return result;
    }

    const AxialGrid grid(0.0, step / 2.0, 2 * total_steps + 1);
    const TrajectorySampler sampler(fluct, grid);
    std::vector<LSymbolBasis> bases;
    bases.reserve(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) bases.push_back(l_symbol_basis(m, grid.at(i), beam, settings.diagonal_only));


    constexpr std::size_t kChunk = 32;
    const std::size_t n_chunks = (settings.realizations + kChunk - 1) / kChunk;
    std::vector<detail::ChunkSums> chunks(n_chunks);

    const auto run_chunk = [&](std::size_t c) {
        detail::ChunkSums sums;
        sums.sum.assign(n_snap, Eigen::MatrixXcd::Zero(dim, dim));
        sums.sum_sq_re.assign(n_snap, Eigen::MatrixXd::Zero(dim, dim));
        sums.sum_sq_im.assign(n_snap, Eigen::MatrixXd::Zero(dim, dim));
        const std::size_t begin = c * kChunk;
        const std::size_t end = std::min(settings.realizations, begin + kChunk);
        for (std::size_t r = begin; r < end; ++r) {
            const MetricTrajectory t1 = sampler.sample(detail::realization_seed(settings.base_seed, r, 1));
            const MetricTrajectory t2 = sampler.sample(detail::realization_seed(settings.base_seed, r, 2));
            const auto generator_at = [&](std::size_t node) {
                const MetricPoint h1{t1.components[0][node], t1.components[1][node], t1.components[2][node],
                                     t1.components[3][node]};
                const MetricPoint h2{t2.components[0][node], t2.components[1][node], t2.components[2][node],
                                     t2.components[3][node]};
                h1.validate();
                h2.validate();
                return EomGenerator(bases[node].evaluate(h1), bases[node].evaluate(h2), settings.diagonal_only);
            };

            Eigen::MatrixXcd rho = rho0.matrix();
            std::size_t snap = 0;
            const auto store = [&](std::size_t idx) {
                sums.sum[idx] += rho;
                sums.sum_sq_re[idx] += rho.real().cwiseAbs2();
                sums.sum_sq_im[idx] += rho.imag().cwiseAbs2();
                sums.max_hermiticity_error =
                    std::max(sums.max_hermiticity_error, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
            };
            while (snap < n_snap && checkpoint_steps[snap] == 0) store(snap++);

            EomGenerator g_start = generator_at(0);
            for (std::size_t s = 0; s < total_steps; ++s) {
                const EomGenerator g_mid = generator_at(2 * s + 1);
                EomGenerator g_end = generator_at(2 * s + 2);
                const Eigen::MatrixXcd k1 = g_start.apply(rho);
                const Eigen::MatrixXcd k2 = g_mid.apply(rho + 0.5 * step * k1);
                const Eigen::MatrixXcd k3 = g_mid.apply(rho + 0.5 * step * k2);
                const Eigen::MatrixXcd k4 = g_end.apply(rho + step * k3);
                rho += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                g_start = std::move(g_end);

                sums.max_trace_error = std::max(sums.max_trace_error, std::abs(rho.trace() - rho0.matrix().trace()));
                for (Eigen::Index a = 0; a < dim; ++a)
                    sums.max_population_drift =
                        std::max(sums.max_population_drift, std::abs(rho(a, a) - rho0.matrix()(a, a)));
                while (snap < n_snap && checkpoint_steps[snap] == s + 1) store(snap++);
            }
        }
        chunks[c] = std::move(sums);
    };

    unsigned n_threads = settings.threads ? settings.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_chunks));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    for (unsigned w = 0; w < n_threads; ++w)
        workers.emplace_back([&] {
            for (std::size_t c = next++; c < n_chunks; c = next++) {
                try {
                    run_chunk(c);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                    return;
                }
            }
        });
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);

    // reduce chunk sums in index order so the result does not depend on scheduling
    const double n = static_cast<double>(settings.realizations);
    for (std::size_t i = 0; i < n_snap; ++i) {
        Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
        Eigen::MatrixXd sq_re = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::MatrixXd sq_im = Eigen::MatrixXd::Zero(dim, dim);
        for (const auto& c : chunks) {
            sum += c.sum[i];
            sq_re += c.sum_sq_re[i];
            sq_im += c.sum_sq_im[i];
        }
        MonteCarloSnapshot snap{distances[i], sum / n, Eigen::MatrixXcd(dim, dim)};
        for (Eigen::Index a = 0; a < dim; ++a)
            for (Eigen::Index b = 0; b < dim; ++b) {
                const double mr = snap.mean(a, b).real();
                const double mi = snap.mean(a, b).imag();
                const double var_re = std::max(sq_re(a, b) / n - mr * mr, 0.0) * n / (n - 1.0);
                const double var_im = std::max(sq_im(a, b) / n - mi * mi, 0.0) * n / (n - 1.0);
                snap.standard_error(a, b) = {std::sqrt(var_re / n), std::sqrt(var_im / n)};
            }
        result.snapshots.push_back(std::move(snap));
    }
    for (const auto& c : chunks) {
        result.max_trace_error = std::max(result.max_trace_error, c.max_trace_error);
        result.max_hermiticity_error = std::max(result.max_hermiticity_error, c.max_hermiticity_error);
        result.max_population_drift = std::max(result.max_population_drift, c.max_population_drift);
    }
    return result;
}

inline MonteCarloSnapshot evolve_monte_carlo(const TwoPhotonDensityMatrix& rho0, double x3, const BeamParameters& beam,
                                             const FluctuationParameters& fluct, const MonteCarloSettings& settings) {
    return evolve_monte_carlo_path(rho0, {x3}, beam, fluct, settings).snapshots.front();
}

/// Least-squares slope of log|y| against x.
inline double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_log_slope: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ly = std::log(std::abs(y[i]));
        sx += x[i];
        sy += ly;
        sxx += x[i] * x[i];
        sxy += x[i] * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oamgrav
