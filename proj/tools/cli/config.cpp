#include "cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace oamgrav::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!keys.count(key)) throw ConfigError("config: unknown key '" + key + "' in " + where);
}

const json& section(const json& doc, const char* name) {
    static const json empty = json::object();
    if (!doc.contains(name)) return empty;
    const json& s = doc.at(name);
    if (!s.is_object()) throw ConfigError(std::string("config: '") + name + "' must be an object");
    return s;
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: " + where + "." + key + " is missing or has the wrong type");
    }
}

template <class T>
void maybe(const json& obj, const char* key, const std::string& where, T& out) {
    if (obj.contains(key)) out = get<T>(obj, key, where);
}

double positive(double v, const std::string& what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("config: " + what + " must be positive and finite");
    return v;
}

}  // namespace

std::vector<double> SweepConfig::points() const {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out[static_cast<std::size_t>(i)] = i == count - 1 ? stop : start + (stop - start) * i / (count - 1);
    return out;
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown(doc, "config",
                   {"beam", "fluctuation", "dimensions", "sweep", "monte_carlo", "quadrature", "modes", "lsymbols",
                    "evolve", "reproduce", "output_dir"});
    ExperimentConfig cfg;
    cfg.document = doc;

    const json& beam = section(doc, "beam");
    reject_unknown(beam, "beam", {"k", "w0"});
    cfg.k = positive(get<double>(beam, "k", "beam"), "beam.k");
    cfg.w0 = positive(get<double>(beam, "w0", "beam"), "beam.w0");

    const json& fl = section(doc, "fluctuation");
    reject_unknown(fl, "fluctuation", {"A", "L"});
    cfg.A = get<double>(fl, "A", "fluctuation");
    if (!(cfg.A >= 0.0) || !std::isfinite(cfg.A)) throw ConfigError("config: fluctuation.A must be non-negative");
    cfg.L = positive(get<double>(fl, "L", "fluctuation"), "fluctuation.L");

    maybe(doc, "dimensions", "config", cfg.dimensions);
    if (cfg.dimensions.empty()) throw ConfigError("config: dimensions must not be empty");
    for (int d : cfg.dimensions)
        if (d < 3 || d % 2 == 0 || d > 25)
            throw ConfigError("config: dimension " + std::to_string(d) + " must be odd and in [3, 25]");

    const json& sw = section(doc, "sweep");
    reject_unknown(sw, "sweep", {"start", "stop", "count"});
    maybe(sw, "start", "sweep", cfg.sweep.start);
    maybe(sw, "stop", "sweep", cfg.sweep.stop);
    maybe(sw, "count", "sweep", cfg.sweep.count);
    if (!(cfg.sweep.start >= 0.0)) throw ConfigError("config: sweep.start must be >= 0");
    if (!(cfg.sweep.stop >= cfg.sweep.start) || !std::isfinite(cfg.sweep.stop))
        throw ConfigError("config: sweep.stop must be finite and >= sweep.start");
    if (cfg.sweep.count < 2) throw ConfigError("config: sweep.count must be >= 2");

    const json& mc = section(doc, "monte_carlo");
    reject_unknown(mc, "monte_carlo",
                   {"n_realizations", "grid_spacing", "base_seed", "dimension", "distances", "distance_unit", "elements",
                    "threads"});
    maybe(mc, "n_realizations", "monte_carlo", cfg.monte_carlo.n_realizations);
    if (mc.contains("grid_spacing"))
        cfg.monte_carlo.grid_spacing = positive(get<double>(mc, "grid_spacing", "monte_carlo"), "monte_carlo.grid_spacing");
    maybe(mc, "base_seed", "monte_carlo", cfg.monte_carlo.base_seed);
    maybe(mc, "dimension", "monte_carlo", cfg.monte_carlo.dimension);
    maybe(mc, "distances", "monte_carlo", cfg.monte_carlo.distances);
    maybe(mc, "elements", "monte_carlo", cfg.monte_carlo.elements);
    if (mc.contains("distance_unit")) {
        const auto unit = get<std::string>(mc, "distance_unit", "monte_carlo");
        if (unit != "kappa" && unit != "absolute")
            throw ConfigError("config: monte_carlo.distance_unit must be kappa or absolute");
        cfg.monte_carlo.distances_in_kappa = unit == "kappa";
    }
    maybe(mc, "threads", "monte_carlo", cfg.monte_carlo.threads);
    {
        const int d = cfg.monte_carlo.dimension;
        if (d < 3 || d % 2 == 0 || d > 25) throw ConfigError("config: monte_carlo.dimension must be odd and in [3, 25]");
        const int m = (d - 1) / 2;
        if (cfg.monte_carlo.distances.empty()) throw ConfigError("config: monte_carlo.distances must not be empty");
        for (double x : cfg.monte_carlo.distances)
            if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("config: monte_carlo.distances must be >= 0");
        for (const auto& e : cfg.monte_carlo.elements)
            for (int v : e)
                if (std::abs(v) > m) throw ConfigError("config: monte_carlo.elements index exceeds M");
    }

    const json& q = section(doc, "quadrature");
    reject_unknown(q, "quadrature", {"extent", "nodes"});
    maybe(q, "extent", "quadrature", cfg.quadrature.extent);
    maybe(q, "nodes", "quadrature", cfg.quadrature.nodes);
    positive(cfg.quadrature.extent, "quadrature.extent");
    if (cfg.quadrature.nodes < 5) throw ConfigError("config: quadrature.nodes must be >= 5");

    const json& mo = section(doc, "modes");
    reject_unknown(mo, "modes", {"l", "p", "z", "grid_points", "half_extent"});
    maybe(mo, "l", "modes", cfg.modes.l);
    maybe(mo, "p", "modes", cfg.modes.p);
    maybe(mo, "z", "modes", cfg.modes.z);
    maybe(mo, "grid_points", "modes", cfg.modes.grid_points);
    maybe(mo, "half_extent", "modes", cfg.modes.half_extent);
    if (cfg.modes.grid_points < 2) throw ConfigError("config: modes.grid_points must be >= 2");
    positive(cfg.modes.half_extent, "modes.half_extent");

    const json& ls = section(doc, "lsymbols");
    reject_unknown(ls, "lsymbols", {"max_l", "z", "h", "path"});
    maybe(ls, "max_l", "lsymbols", cfg.lsymbols.max_l);
    maybe(ls, "z", "lsymbols", cfg.lsymbols.z);
    maybe(ls, "path", "lsymbols", cfg.lsymbols.path);
    if (ls.contains("h")) {
        const json& h = ls.at("h");
        if (!h.is_object()) throw ConfigError("config: lsymbols.h must be an object");
        reject_unknown(h, "lsymbols.h", {"h00", "h11", "h22", "h33"});
        cfg.lsymbols.h = {get<double>(h, "h00", "lsymbols.h"), get<double>(h, "h11", "lsymbols.h"),
                          get<double>(h, "h22", "lsymbols.h"), get<double>(h, "h33", "lsymbols.h")};
    }
    if (cfg.lsymbols.max_l < 0 || cfg.lsymbols.max_l > 12) throw ConfigError("config: lsymbols.max_l must be in [0, 12]");
    if (cfg.lsymbols.path != "generating" && cfg.lsymbols.path != "quadrature" && cfg.lsymbols.path != "both")
        throw ConfigError("config: lsymbols.path must be generating, quadrature or both");

    const json& ev = section(doc, "evolve");
    reject_unknown(ev, "evolve", {"dimension"});
    if (ev.contains("dimension")) cfg.evolve.dimension = get<int>(ev, "dimension", "evolve");
    if (cfg.evolve.dimension) {
        const int d = *cfg.evolve.dimension;
        if (d < 3 || d % 2 == 0 || d > 25) throw ConfigError("config: evolve.dimension must be odd and in [3, 25]");
    }

    const json& rp = section(doc, "reproduce");
    reject_unknown(rp, "reproduce", {"density_matrix_dimension"});
    maybe(rp, "density_matrix_dimension", "reproduce", cfg.reproduce.density_matrix_dimension);
    {
        const int d = cfg.reproduce.density_matrix_dimension;
        if (d < 3 || d % 2 == 0 || d > 25)
            throw ConfigError("config: reproduce.density_matrix_dimension must be odd and in [3, 25]");
    }

    maybe(doc, "output_dir", "config", cfg.output_dir);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

void override_seed(ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.monte_carlo.base_seed = seed;
    cfg.document["monte_carlo"]["base_seed"] = seed;
}

}  // namespace oamgrav::cli
