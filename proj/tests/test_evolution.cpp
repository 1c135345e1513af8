#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oamgrav/evolution.hpp"
#include "support.hpp"

using namespace oamgrav;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Beam and fluctuation scales chosen so that kappa = 1 exactly (up to
// rounding) with L = 0.02 kappa and w0 = 1e-3: k^2 = 3 L A^2 / (2 w0^4).
struct UnitKappa {
    double w0 = 1e-3;
    double a = 0.05;
    double l = 0.02;
    BeamParameters beam{std::sqrt(3.0 * 0.02 * 0.05 * 0.05 / (2.0 * std::pow(1e-3, 4))), 1e-3};
    FluctuationParameters fluct{0.05, 0.02};
};

/// Uniform superposition over all (l1, l2): every coherence is 1/D^2.
TwoPhotonDensityMatrix uniform_product_state(int max_l) {
    const int d = 2 * max_l + 1;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Constant(d * d, 1.0 / d);
    return TwoPhotonDensityMatrix(max_l, psi * psi.adjoint());
}

MonteCarloSettings settings(std::size_t n, std::uint64_t seed, double spacing) {
    MonteCarloSettings s;
    s.grid_spacing = spacing;
    s.realizations = n;
    s.base_seed = seed;
    return s;
}

}  // namespace

TEST_CASE("density matrix validation") {
    testing::Gen gen(1);
    const auto good = gen.density_matrix(1).matrix();
    CHECK_NOTHROW(TwoPhotonDensityMatrix(1, good));

    Eigen::MatrixXcd skew = good;
    skew(0, 1) += cdouble(0.1, 0.0);
    CHECK_THROWS_AS(TwoPhotonDensityMatrix(1, skew), InvalidArgument);
    CHECK_THROWS_AS(TwoPhotonDensityMatrix(1, 2.0 * good), InvalidArgument);

    Eigen::MatrixXcd indefinite = Eigen::MatrixXcd::Zero(9, 9);
    indefinite(0, 0) = 1.5;
    indefinite(1, 1) = -0.5;
    CHECK_THROWS_AS(TwoPhotonDensityMatrix(1, indefinite), InvalidArgument);
    CHECK_THROWS_AS(TwoPhotonDensityMatrix(2, good), InvalidArgument);
    CHECK_THROWS_AS(initial_maximally_entangled(13), InvalidArgument);

    const TwoPhotonDensityMatrix rho(1, good);
    CHECK(rho.index(-1, -1) == 0);
    CHECK(rho.index(1, 1) == 8);
    CHECK(rho.index(0, 1) == 5);
    CHECK_THROWS_AS(rho.index(2, 0), InvalidArgument);
}

TEST_CASE("maximally entangled initial state") {
    const auto rho = initial_maximally_entangled(1);
    CHECK(rho.matrix().rows() == 9);
    int nonzero = 0;
    for (Eigen::Index i = 0; i < 9; ++i)
        for (Eigen::Index j = 0; j < 9; ++j)
            if (rho.matrix()(i, j) != cdouble{}) {
                ++nonzero;
                CHECK_THAT(rho.matrix()(i, j).real(), WithinRel(1.0 / 3.0, 1e-15));
            }
    CHECK(nonzero == 9);
    CHECK(rho.at(1, -1, -1, 1) != cdouble{});
    CHECK_THAT(rho.trace(), WithinAbs(1.0, 1e-15));
    CHECK_THAT(rho.matrix().cwiseAbs2().sum(), WithinAbs(1.0, 1e-15));
    CHECK_THROWS_AS(initial_maximally_entangled(0), InvalidArgument);
    CHECK_NOTHROW(TwoPhotonDensityMatrix(4, initial_maximally_entangled(4).matrix()));
}

TEST_CASE("characteristic length") {
    CHECK_THAT(*characteristic_length({1.0, 1.0}, {1.0, 1.0}), WithinRel(2.0 / 3.0, 1e-15));
    const double base = *characteristic_length({3.0, 0.5}, {0.02, 2.0});
    CHECK_THAT(*characteristic_length({3.0, 1.0}, {0.02, 2.0}), WithinRel(16.0 * base, 1e-14));
    CHECK_THAT(*characteristic_length({3.0, 0.5}, {0.04, 2.0}), WithinRel(base / 4.0, 1e-14));
    CHECK_FALSE(characteristic_length({3.0, 0.5}, {0.0, 2.0}).has_value());
    CHECK_THAT(*characteristic_length(UnitKappa{}.beam, UnitKappa{}.fluct), WithinRel(1.0, 1e-12));
}

TEST_CASE("C coefficients") {
    CHECK(c_coefficient(1, -1, 1, -1) == 0);
    CHECK(c_coefficient(1, -1, -1, 1) == 0);
    CHECK(c_coefficient(2, -2, 0, 0) == 8);
    CHECK(c_coefficient(1, 0, 0, 0) == 1);
    testing::Gen gen(2);
    for (int i = 0; i < 500; ++i) {
        const int l1 = gen.integer(-6, 6), l2 = gen.integer(-6, 6), j1 = gen.integer(-6, 6), j2 = gen.integer(-6, 6);
        const int c = c_coefficient(l1, l2, j1, j2);
        CHECK(c >= 0);
        CHECK((c == 0) == (std::abs(l1) == std::abs(j1) && std::abs(l2) == std::abs(j2)));
    }
    CHECK_THROWS_AS(DecayModel(0.0), InvalidArgument);
}

TEST_CASE("analytic evolution: named cases") {
    const auto rho0 = initial_maximally_entangled(1);
    const DecayModel model(1.0);
    CHECK(evolve_analytic(rho0, 0.0, model).matrix() == rho0.matrix());
    CHECK_THROWS_AS(evolve_analytic(rho0, -1.0, model), InvalidArgument);

    const auto rho = evolve_analytic(rho0, 1.0, model);
    CHECK_THAT(rho.at(1, -1, 0, 0).real(), WithinRel(std::exp(-2.0) / 3.0, 1e-15));
    for (int l = -1; l <= 1; ++l)
        for (int j = -1; j <= 1; ++j)
            if (std::abs(l) == std::abs(j)) CHECK(rho.at(l, -l, j, -j) == rho0.at(l, -l, j, -j));

    const auto frozen = evolve_analytic(rho0, 123.0, DecayModel(std::nullopt));
    CHECK(frozen.matrix() == rho0.matrix());
}

TEST_CASE("property: analytic evolution invariants on random states") {
    testing::Gen gen(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto rho0 = gen.density_matrix(gen.integer(1, 2));
        const DecayModel model(gen.uniform(0.1, 5.0));
        const double a = gen.uniform(0.0, 3.0), b = gen.uniform(0.0, 3.0);
        const auto ra = evolve_analytic(rho0, a, model);
        const auto rab = evolve_analytic(ra, b, model);
        const auto direct = evolve_analytic(rho0, a + b, model);

        CHECK((rab.matrix() - direct.matrix()).cwiseAbs().maxCoeff() <= 1e-14 * rho0.matrix().cwiseAbs().maxCoeff());
        CHECK(std::abs(direct.trace() - 1.0) < 1e-10);
        CHECK(direct.hermiticity_error() < 1e-10);
        CHECK((ra.matrix().cwiseAbs().array() <= rho0.matrix().cwiseAbs().array()).all());
        CHECK((direct.matrix().cwiseAbs().array() <= ra.matrix().cwiseAbs().array()).all());
    }
}

TEST_CASE("Monte Carlo: regime and argument checks") {
    const UnitKappa u;
    const auto rho0 = initial_maximally_entangled(1);
    CHECK_THROWS_AS(evolve_monte_carlo(rho0, 0.5, u.beam, u.fluct, settings(99, 1, u.l / 8)), RegimeError);
    CHECK_THROWS_AS(evolve_monte_carlo(rho0, 0.5, u.beam, u.fluct, settings(100, 1, u.l / 3)), RegimeError);
    CHECK_THROWS_AS(evolve_monte_carlo(rho0, 0.1, u.beam, u.fluct, settings(100, 1, u.l / 8)), RegimeError);
    // kappa / 100 is tighter than L / 4 once L > kappa / 25
    const FluctuationParameters wide(0.05, 0.2);
    const BeamParameters b(std::sqrt(3.0 * 0.2 * 0.05 * 0.05 / (2.0 * std::pow(1e-3, 4))), 1e-3);
    CHECK_THROWS_AS(evolve_monte_carlo(rho0, 4.0, b, wide, settings(100, 1, 0.04)), RegimeError);
    CHECK_THROWS_AS(evolve_monte_carlo_path(rho0, {0.5, 0.25}, u.beam, u.fluct, settings(100, 1, u.l / 8)),
                    InvalidArgument);
    CHECK_THROWS_AS(evolve_monte_carlo_path(rho0, {0.3001, 0.5}, u.beam, u.fluct, settings(100, 1, u.l / 8)),
                    InvalidArgument);
}

TEST_CASE("Monte Carlo: zero strength returns the initial state exactly") {
    const BeamParameters beam(1e4, 1e-3);
    const FluctuationParameters none(0.0, 0.02);
    const auto rho0 = initial_maximally_entangled(1);
    const auto snap = evolve_monte_carlo(rho0, 0.5, beam, none, settings(200, 5, 0.0025));
    CHECK(snap.mean == rho0.matrix());
    CHECK(snap.standard_error.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Monte Carlo: deterministic and independent of thread count") {
    const UnitKappa u;
    const auto rho0 = initial_maximally_entangled(1);
    auto s = settings(150, 77, u.l / 8);
    s.threads = 1;
    const auto a = evolve_monte_carlo(rho0, 0.25, u.beam, u.fluct, s);
    s.threads = 3;
    const auto b = evolve_monte_carlo(rho0, 0.25, u.beam, u.fluct, s);
    CHECK(a.mean == b.mean);
    CHECK(a.standard_error == b.standard_error);
    s.base_seed = 78;
    const auto c = evolve_monte_carlo(rho0, 0.25, u.beam, u.fluct, s);
    CHECK(a.mean != c.mean);
}

TEST_CASE("property: each realization preserves trace, Hermiticity and populations") {
    const UnitKappa u;
    testing::Gen gen(4);
    for (int trial = 0; trial < 5; ++trial) {
        const auto rho0 = gen.density_matrix(2);
        const auto r = evolve_monte_carlo_path(rho0, {0.25, 0.5}, u.beam, u.fluct, settings(100, 10 + trial, u.l / 8));
        CHECK(r.max_trace_error < 1e-10);
        CHECK(r.max_hermiticity_error < 1e-10);
        CHECK(r.max_population_drift < 1e-10);
        for (const auto& snap : r.snapshots) {
            CHECK(std::abs(snap.mean.trace() - 1.0) < 1e-10);
            CHECK((snap.mean - snap.mean.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("Monte Carlo: island elements keep their value in every realization") {
    const UnitKappa u;
    const auto rho0 = initial_maximally_entangled(1);
    const auto snap = evolve_monte_carlo(rho0, 0.5, u.beam, u.fluct, settings(200, 9, u.l / 8));
    for (int l = -1; l <= 1; ++l)
        for (int j = -1; j <= 1; ++j)
            if (std::abs(l) == std::abs(j)) {
                const auto i = rho0.index(l, -l), k = rho0.index(j, -j);
                CHECK(std::abs(snap.mean(i, k) - rho0.matrix()(i, k)) < 1e-10);
                CHECK(std::abs(snap.standard_error(i, k)) < 1e-10);
            }
}

TEST_CASE("Monte Carlo matches the exact Gaussian ensemble average") {
    // <exp(i Theta)> for the accumulated phase Theta, with the kernel's
    // double integral done exactly.
    const UnitKappa u;
    const auto rho0 = initial_maximally_entangled(1);
    const auto r = evolve_monte_carlo_path(rho0, {0.25, 0.5}, u.beam, u.fluct, settings(2000, 2024, u.l / 8));
    const auto i = rho0.index(1, -1), k = rho0.index(0, 0);
    for (const auto& snap : r.snapshots) {
        const double expect = std::exp(-kernel_dephasing_exponent(2, snap.x3, u.beam, u.fluct)) / 3.0;
        INFO("x3 = " << snap.x3 << " mean = " << snap.mean(i, k) << " se = " << snap.standard_error(i, k)
                     << " kernel = " << expect);
        CHECK(std::abs(snap.mean(i, k).real() - expect) <= 3.0 * snap.standard_error(i, k).real());
        CHECK(std::abs(snap.mean(i, k).imag()) <= 3.0 * snap.standard_error(i, k).imag());
    }
}

TEST_CASE("kernel exponent limits") {
    const UnitKappa u;
    // short distances: quadratic onset C x^2 / (2 kappa L)
    const double x = 1e-4;
    CHECK_THAT(kernel_dephasing_exponent(2, x, u.beam, u.fluct), WithinRel(2.0 * x * x / (2.0 * u.l), 1e-3));
    // long distances: slope (sqrt(pi)/2) C / kappa
    const double slope = kernel_dephasing_exponent(1, 10.0, u.beam, u.fluct) - kernel_dephasing_exponent(1, 9.0, u.beam, u.fluct);
    CHECK_THAT(slope, WithinRel(std::sqrt(std::numbers::pi) / 2.0, 1e-9));
}

TEST_CASE("log-slope fit") {
    std::vector<double> x{0.0, 1.0, 2.0, 3.0}, y;
    for (double v : x) y.push_back(-0.2 * std::exp(-1.5 * v));
    CHECK_THAT(fit_log_slope(x, y), WithinRel(-1.5, 1e-12));
    CHECK_THROWS_AS(fit_log_slope({1.0}, {1.0}), InvalidArgument);
}

TEST_CASE("Monte Carlo decay rates recover C / kappa within 10%", "[rate]") {
    const UnitKappa u;
    const auto rho0 = uniform_product_state(2);
    const std::vector<double> xs{0.2, 0.3, 0.4, 0.5};
    const auto r = evolve_monte_carlo_path(rho0, xs, u.beam, u.fluct, settings(5000, 31337, u.l / 8));
    const struct {
        int c;
        int l1, l2, j1, j2;
    } elements[] = {{1, 1, 0, 0, 0}, {2, 1, -1, 0, 0}, {4, 2, 0, 0, 0}};
    for (const auto& e : elements) {
        REQUIRE(c_coefficient(e.l1, e.l2, e.j1, e.j2) == e.c);
        std::vector<double> ys;
        for (const auto& snap : r.snapshots) ys.push_back(snap.mean(rho0.index(e.l1, e.l2), rho0.index(e.j1, e.j2)).real());
        const double slope = fit_log_slope(xs, ys);
        INFO("C = " << e.c << ": fitted slope " << slope << ", expected " << -e.c << ", kernel asymptote "
                    << -e.c * std::sqrt(std::numbers::pi) / 2.0);
        CHECK(std::abs(slope + e.c) <= 0.1 * e.c);
    }
}

TEST_CASE("Monte Carlo decay rates follow the exact ensemble average") {
    const UnitKappa u;
    const auto rho0 = uniform_product_state(2);
    const std::vector<double> xs{0.2, 0.3, 0.4, 0.5};
    const auto r = evolve_monte_carlo_path(rho0, xs, u.beam, u.fluct, settings(2000, 4242, u.l / 8));
    for (const auto& [l1, l2, j1, j2] : {std::array{1, 0, 0, 0}, std::array{1, -1, 0, 0}, std::array{2, 0, 0, 0}}) {
        const int c = c_coefficient(l1, l2, j1, j2);
        std::vector<double> ys, kernel;
        for (const auto& snap : r.snapshots) {
            ys.push_back(snap.mean(rho0.index(l1, l2), rho0.index(j1, j2)).real());
            kernel.push_back(std::exp(-kernel_dephasing_exponent(c, snap.x3, u.beam, u.fluct)));
        }
        const double fitted = fit_log_slope(xs, ys), expect = fit_log_slope(xs, kernel);
        INFO("C = " << c << ": fitted " << fitted << ", kernel " << expect);
        CHECK(std::abs(fitted - expect) <= 0.1 * std::abs(expect));
    }
}
