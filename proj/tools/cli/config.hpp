#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oamgrav/beam_optics.hpp"
#include "oamgrav/coupling.hpp"
#include "oamgrav/fluctuation_field.hpp"

namespace oamgrav::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Raised for malformed or inconsistent configuration (exit status 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

struct SweepConfig {
    double start = 0.0;  // units of kappa
    double stop = 3.0;
    int count = 61;

    std::vector<double> points() const;
};

struct MonteCarloConfig {
    std::size_t n_realizations = 2000;
    std::optional<double> grid_spacing;  // absolute; defaults to L / 8
    std::uint64_t base_seed = 1;
    int dimension = 3;
    std::vector<double> distances{0.25, 0.5};
    bool distances_in_kappa = true;  // "distance_unit": "kappa" | "absolute"
    std::vector<std::array<int, 4>> elements{{1, -1, 0, 0}};
    unsigned threads = 0;
};

struct QuadratureConfig {
    double extent = 6.0;  // half width in units of w(z)
    std::size_t nodes = 769;
};

struct ModesConfig {
    int l = 0;
    int p = 0;
    double z = 0.0;
    int grid_points = 65;     // per axis
    double half_extent = 3.0;  // units of w(z)
};

struct LSymbolsConfig {
    int max_l = 2;
    double z = 0.0;
    MetricPoint h{1e-3, 2e-3, -1e-3, 5e-4};
    std::string path = "generating";  // generating | quadrature | both
};

struct EvolveConfig {
    std::optional<int> dimension;  // defaults to the first entry of dimensions
};

struct ReproduceConfig {
    int density_matrix_dimension = 7;
};

struct ExperimentConfig {
    double k = 0.0;
    double w0 = 0.0;
    double A = 0.0;
    double L = 0.0;
    std::vector<int> dimensions{3, 5, 7, 11, 19};
    SweepConfig sweep;
    MonteCarloConfig monte_carlo;
    QuadratureConfig quadrature;
    ModesConfig modes;
    LSymbolsConfig lsymbols;
    EvolveConfig evolve;
    ReproduceConfig reproduce;
    std::string output_dir = ".";
    /// Document as read, with command-line overrides applied; recorded in
    /// every output header.
    nlohmann::json document;

    BeamParameters beam() const { return {k, w0}; }
    FluctuationParameters fluctuation() const { return {A, L}; }
};

/// Parses and validates; throws ConfigError on any problem.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Replaces monte_carlo.base_seed, keeping the recorded document in step.
void override_seed(ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace oamgrav::cli
