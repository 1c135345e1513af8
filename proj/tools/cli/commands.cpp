#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <numbers>
#include <ostream>

#include "oamgrav/oamgrav.hpp"

namespace oamgrav::cli {

namespace {

namespace fs = std::filesystem;

csv::Table make_table(const ExperimentConfig& cfg, const std::string& what, std::vector<std::string> columns) {
    csv::Table t(std::move(columns));
    t.add_comment(std::string("oamgrav ") + kVersion + " " + what);
    t.add_comment("config: " + cfg.document.dump());
    return t;
}

std::string save(const csv::Table& table, const std::string& out_dir, const std::string& name) {
    fs::create_directories(out_dir);
    const std::string path = (fs::path(out_dir) / name).string();
    table.save(path);
    return path;
}

double require_kappa(const ExperimentConfig& cfg, const char* what) {
    const auto kappa = characteristic_length(cfg.beam(), cfg.fluctuation());
    if (!kappa)
        throw ConfigError(std::string(what) + ": distances are in units of kappa, which is infinite for A = 0");
    return *kappa;
}

int max_l_of(int dimension) { return (dimension - 1) / 2; }

void note_weak_field(const ExperimentConfig& cfg, CommandResult& r) {
    if (auto w = cfg.fluctuation().warning(); !w.empty()) r.messages.push_back("warning: " + w);
}

std::int64_t i64(int v) { return v; }

/// Runs fn(D) for every configured dimension concurrently; results keep the
/// order of cfg.dimensions.
template <class Fn>
auto per_dimension(const ExperimentConfig& cfg, Fn fn) {
    using R = decltype(fn(3));
    std::vector<std::future<R>> jobs;
    for (int d : cfg.dimensions) jobs.push_back(std::async(std::launch::async, fn, d));
    std::vector<R> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

}  // namespace

CommandResult cmd_modes(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto beam = cfg.beam();
    const ModeIndex mode(cfg.modes.l, cfg.modes.p);
    const double z = cfg.modes.z;
    const double w = beam_geometry(beam, z).width;
    const int n = cfg.modes.grid_points;
    const double half = cfg.modes.half_extent * w;

    auto t = make_table(cfg, "modes", {"x", "y", "re", "im", "intensity", "phase"});
    t.add_comment("mode l=" + std::to_string(mode.l) + " p=" + std::to_string(mode.p) + " z=" + csv::format(z) +
                  " w(z)=" + csv::format(w));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = -half + 2.0 * half * i / (n - 1);
            const double y = -half + 2.0 * half * j / (n - 1);
            const cdouble v = evaluate_lg(mode, x, y, z, beam);
            t.add_row({x, y, v.real(), v.imag(), std::norm(v), std::arg(v)});
        }
    CommandResult r;
    r.files.push_back(save(t, out_dir, "mode_l" + std::to_string(mode.l) + "_p" + std::to_string(mode.p) + ".csv"));
    return r;
}

CommandResult cmd_lsymbols(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto beam = cfg.beam();
    const auto& ls = cfg.lsymbols;
    const bool want_gen = ls.path != "quadrature";
    const bool want_quad = ls.path != "generating";

    std::optional<LSymbolMatrix> gen, quad;
    if (want_gen) gen = l_symbol_matrix_generating(ls.max_l, ls.h, ls.z, beam);
    if (want_quad) {
        const auto rule = TransverseQuadrature::uniform(beam_geometry(beam, ls.z).width, cfg.quadrature.extent,
                                                        cfg.quadrature.nodes);
        quad = l_symbol_matrix_quadrature(ls.max_l, ls.h, ls.z, beam, rule);
    }

    auto t = make_table(cfg, "lsymbols", {"n", "s", "path", "re", "im"});
    for (int n = -ls.max_l; n <= ls.max_l; ++n)
        for (int s = -ls.max_l; s <= ls.max_l; ++s) {
            if (gen) t.add_row({i64(n), i64(s), std::string("generating"), gen->at(n, s).real(), gen->at(n, s).imag()});
            if (quad) t.add_row({i64(n), i64(s), std::string("quadrature"), quad->at(n, s).real(), quad->at(n, s).imag()});
        }

    CommandResult r;
    if (gen && quad) {
        // diagonal entries relative to themselves, the rest relative to the largest entry
        const double scale = gen->values.cwiseAbs().maxCoeff();
        double worst = 0.0;
        for (int n = -ls.max_l; n <= ls.max_l; ++n)
            for (int s = -ls.max_l; s <= ls.max_l; ++s) {
                const double diff = std::abs(gen->at(n, s) - quad->at(n, s));
                const double ref = n == s ? std::abs(gen->at(n, s)) : scale;
                worst = std::max(worst, ref > 0.0 ? diff / ref : diff);
            }
        r.messages.push_back("lsymbols: max relative path difference " + csv::format(worst));
        if (!(worst <= 1e-7)) r.exit_code = kExitOracleMismatch;
    }
    r.files.insert(r.files.begin(), save(t, out_dir, "lsymbols.csv"));
    return r;
}

CommandResult cmd_evolve(const ExperimentConfig& cfg, const std::string& out_dir) {
    const double kappa = require_kappa(cfg, "evolve");
    const int d = cfg.evolve.dimension.value_or(cfg.dimensions.front());
    const int m = max_l_of(d);
    const auto rho0 = initial_maximally_entangled(m);
    const DecayModel model(kappa);

    auto t = make_table(cfg, "evolve", {"x3_over_kappa", "x3", "l1", "l2", "j1", "j2", "re", "im"});
    t.add_comment("D=" + std::to_string(d) + " kappa=" + csv::format(kappa));
    for (double s : cfg.sweep.points()) {
        const auto rho = evolve_analytic(rho0, s * kappa, model);
        for (int l1 = -m; l1 <= m; ++l1)
            for (int l2 = -m; l2 <= m; ++l2)
                for (int j1 = -m; j1 <= m; ++j1)
                    for (int j2 = -m; j2 <= m; ++j2) {
                        const cdouble v = rho.at(l1, l2, j1, j2);
                        if (v == cdouble{}) continue;
                        t.add_row({s, s * kappa, i64(l1), i64(l2), i64(j1), i64(j2), v.real(), v.imag()});
                    }
    }
    CommandResult r;
    note_weak_field(cfg, r);
    r.files.push_back(save(t, out_dir, "evolve_D" + std::to_string(d) + ".csv"));
    return r;
}

CommandResult cmd_metrics(const ExperimentConfig& cfg, const std::string& out_dir) {
    const double kappa = require_kappa(cfg, "metrics");
    const auto points = cfg.sweep.points();

    struct Rows {
        std::vector<MetricsReport> reports;
        double worst_negativity = 0.0;
        double worst_purity = 0.0;
    };
    const auto rows = per_dimension(cfg, [&](int d) {
        const int m = max_l_of(d);
        const auto rho0 = initial_maximally_entangled(m);
        const DecayModel model(kappa);
        Rows out;
        for (double s : points) {
            const auto rep = metrics_report(evolve_analytic(rho0, s * kappa, model), s * kappa);
            out.worst_negativity =
                std::max(out.worst_negativity, std::abs(rep.negativity - negativity_blockwise(s, m, 1.0)));
            out.worst_purity = std::max(out.worst_purity, std::abs(rep.purity - purity_closed_form(s, m, 1.0)));
            out.reports.push_back(rep);
        }
        return out;
    });

    auto t = make_table(cfg, "metrics",
                        {"x3_over_kappa", "x3", "D", "purity", "negativity", "trace", "min_eigenvalue_pt"});
    CommandResult r;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int d = cfg.dimensions[i];
        for (const auto& rep : rows[i].reports)
            t.add_row({rep.x3 / kappa, rep.x3, i64(d), rep.purity, rep.negativity, rep.trace, rep.min_eigenvalue_pt});
        if (!(rows[i].worst_negativity <= 1e-10) || !(rows[i].worst_purity <= 1e-12)) {
            r.exit_code = kExitOracleMismatch;
            r.messages.push_back("metrics: D=" + std::to_string(d) + " disagrees with the closed forms (negativity " +
                                 csv::format(rows[i].worst_negativity) + ", purity " +
                                 csv::format(rows[i].worst_purity) + ")");
        }
    }
    note_weak_field(cfg, r);
    r.files.insert(r.files.begin(), save(t, out_dir, "metrics.csv"));
    return r;
}

CommandResult cmd_reproduce(const ExperimentConfig& cfg, const std::string& figure, const std::string& out_dir) {
    if (figure != "purity" && figure != "negativity" && figure != "density_matrix" && figure != "decay_table")
        throw ConfigError("reproduce: unknown figure '" + figure +
                          "' (expected purity, negativity, density_matrix or decay_table)");
    const double kappa = require_kappa(cfg, "reproduce");
    CommandResult r;
    note_weak_field(cfg, r);

    if (figure == "purity" || figure == "negativity") {
        const bool is_purity = figure == "purity";
        const auto points = cfg.sweep.points();
        struct Curve {
            std::vector<double> values;
            double worst = 0.0;
        };
        const auto curves = per_dimension(cfg, [&](int d) {
            const int m = max_l_of(d);
            const auto rho0 = initial_maximally_entangled(m);
            const DecayModel model(kappa);
            Curve c;
            for (double s : points) {
                const auto rho = evolve_analytic(rho0, s * kappa, model);
                const double v = is_purity ? purity(rho) : negativity(rho);
                const double ref = is_purity ? purity_closed_form(s, m, 1.0) : negativity_blockwise(s, m, 1.0);
                c.worst = std::max(c.worst, std::abs(v - ref));
                c.values.push_back(v);
            }
            return c;
        });
        const double tol = is_purity ? 1e-12 : 1e-10;
        for (std::size_t i = 0; i < curves.size(); ++i) {
            const int d = cfg.dimensions[i];
            auto t = make_table(cfg, "reproduce " + figure, {"x3_over_kappa", "x3", "D", figure});
            for (std::size_t k = 0; k < points.size(); ++k)
                t.add_row({points[k], points[k] * kappa, i64(d), curves[i].values[k]});
            r.files.push_back(save(t, out_dir, figure + "_D" + std::to_string(d) + ".csv"));
            if (!(curves[i].worst <= tol)) {
                r.exit_code = kExitOracleMismatch;
                r.messages.push_back("reproduce: " + figure + " for D=" + std::to_string(d) +
                                     " departs from the closed form by " + csv::format(curves[i].worst));
            }
        }
        return r;
    }

    if (figure == "density_matrix") {
        const int d = cfg.reproduce.density_matrix_dimension;
        const int m = max_l_of(d);
        const double x_d = decay_distance(m, 1.0);
        const auto rho = evolve_analytic(initial_maximally_entangled(m), x_d * kappa, DecayModel(kappa));
        auto t = make_table(cfg, "reproduce density_matrix", {"l1", "l2", "j1", "j2", "C", "re", "im"});
        t.add_comment("D=" + std::to_string(d) + " x3_over_kappa=" + csv::format(x_d) +
                      " x3=" + csv::format(x_d * kappa));
        for (int l1 = -m; l1 <= m; ++l1)
            for (int l2 = -m; l2 <= m; ++l2)
                for (int j1 = -m; j1 <= m; ++j1)
                    for (int j2 = -m; j2 <= m; ++j2) {
                        const cdouble v = rho.at(l1, l2, j1, j2);
                        if (v == cdouble{}) continue;
                        t.add_row({i64(l1), i64(l2), i64(j1), i64(j2), i64(c_coefficient(l1, l2, j1, j2)), v.real(),
                                   v.imag()});
                    }
        r.files.push_back(save(t, out_dir, "density_matrix_D" + std::to_string(d) + ".csv"));
        return r;
    }

    auto t = make_table(cfg, "reproduce decay_table", {"D", "x3_over_kappa", "x3"});
    for (int d : cfg.dimensions) {
        const double x_d = decay_distance(max_l_of(d), 1.0);
        t.add_row({i64(d), x_d, x_d * kappa});
    }
    r.files.push_back(save(t, out_dir, "decay_table.csv"));
    return r;
}

CommandResult cmd_montecarlo(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto& mc = cfg.monte_carlo;
    const auto beam = cfg.beam();
    const auto fluct = cfg.fluctuation();
    const auto kappa = characteristic_length(beam, fluct);
    if (mc.distances_in_kappa && !kappa)
        throw ConfigError("montecarlo: distances are in units of kappa, which is infinite for A = 0; "
                          "set monte_carlo.distance_unit to absolute");
    const double unit = mc.distances_in_kappa ? *kappa : 1.0;

    std::vector<double> distances;
    for (double x : mc.distances) distances.push_back(x * unit);
    std::sort(distances.begin(), distances.end());
    distances.erase(std::unique(distances.begin(), distances.end()), distances.end());

    const int m = max_l_of(mc.dimension);
    const auto rho0 = initial_maximally_entangled(m);
    MonteCarloSettings settings;
    settings.grid_spacing = mc.grid_spacing.value_or(cfg.L / 8.0);
    settings.realizations = mc.n_realizations;
    settings.base_seed = mc.base_seed;
    settings.threads = mc.threads;
    const auto result = evolve_monte_carlo_path(rho0, distances, beam, fluct, settings);
    const DecayModel model(kappa);

    auto t = make_table(cfg, "montecarlo",
                        {"x3_over_kappa", "x3", "l1", "l2", "j1", "j2", "C", "mean_re", "mean_im", "se_re", "se_im",
                         "analytic", "kernel", "z_analytic", "z_kernel"});
    t.add_comment("D=" + std::to_string(mc.dimension) + " kappa=" + (kappa ? csv::format(*kappa) : "inf") +
                  " step=" + csv::format(result.step) + " max_trace_error=" + csv::format(result.max_trace_error) +
                  " max_hermiticity_error=" + csv::format(result.max_hermiticity_error) +
                  " max_population_drift=" + csv::format(result.max_population_drift));

    const auto z_score = [](double diff, double se) {
        if (se > 0.0) return diff / se;
        return std::abs(diff) <= 1e-12 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    };

    CommandResult r;
    note_weak_field(cfg, r);
    if (result.max_trace_error > 1e-10 || result.max_hermiticity_error > 1e-10)
        r.messages.push_back("montecarlo: per-realization trace/Hermiticity drift exceeds 1e-10");
    double worst = 0.0;
    for (const auto& e : mc.elements) {
        const auto [l1, l2, j1, j2] = e;
        const int c = c_coefficient(l1, l2, j1, j2);
        const cdouble start = rho0.at(l1, l2, j1, j2);
        const Eigen::Index row = rho0.index(l1, l2), col = rho0.index(j1, j2);
        for (const auto& snap : result.snapshots) {
            const cdouble mean = snap.mean(row, col);
            const cdouble se = snap.standard_error(row, col);
            const double analytic = start.real() * model.factor(l1, l2, j1, j2, snap.x3);
            const double kernel =
                start.real() * (kappa ? std::exp(-kernel_dephasing_exponent(c, snap.x3, beam, fluct)) : 1.0);
            const double za = z_score(mean.real() - analytic, se.real());
            const double zk = z_score(mean.real() - kernel, se.real());
            const double zi = z_score(mean.imag() - start.imag(), se.imag());
            worst = std::max({worst, std::abs(za), std::abs(zi)});
            t.add_row({kappa ? snap.x3 / *kappa : 0.0, snap.x3, i64(l1), i64(l2), i64(j1), i64(j2), i64(c),
                       mean.real(), mean.imag(), se.real(), se.imag(), analytic, kernel, za, zk});
        }
    }
    r.messages.push_back("montecarlo: largest |z| against the exponential law " + csv::format(worst));
    if (!(worst <= 3.0)) r.exit_code = kExitOracleMismatch;
    r.files.push_back(save(t, out_dir, "montecarlo.csv"));
    return r;
}

CommandResult cmd_decay_distance(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto kappa = characteristic_length(cfg.beam(), cfg.fluctuation());
    auto t = make_table(cfg, "decay-distance", {"D", "x3_over_kappa", "x3"});
    for (int d : cfg.dimensions) {
        const double x_d = decay_distance(max_l_of(d), 1.0);
        t.add_row({i64(d), x_d, kappa ? csv::Cell(x_d * *kappa) : csv::Cell(std::string("inf"))});
    }
    CommandResult r;
    r.files.push_back(save(t, out_dir, "decay_distance.csv"));
    return r;
}

int run_command(const Invocation& inv, std::ostream& err) {
    try {
        auto cfg = load_config(inv.config_path);
        if (inv.seed) override_seed(cfg, *inv.seed);
        const std::string out = inv.out_dir.empty() ? cfg.output_dir : inv.out_dir;

        CommandResult r;
        if (inv.command == "modes") r = cmd_modes(cfg, out);
        else if (inv.command == "lsymbols") r = cmd_lsymbols(cfg, out);
        else if (inv.command == "evolve") r = cmd_evolve(cfg, out);
        else if (inv.command == "metrics") r = cmd_metrics(cfg, out);
        else if (inv.command == "reproduce") r = cmd_reproduce(cfg, inv.figure, out);
        else if (inv.command == "montecarlo") r = cmd_montecarlo(cfg, out);
        else if (inv.command == "decay-distance") r = cmd_decay_distance(cfg, out);
        else throw ConfigError("unknown command '" + inv.command + "'");

        for (const auto& msg : r.messages) err << msg << '\n';
        for (const auto& f : r.files) err << "wrote " << f << '\n';
        return r.exit_code;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const RegimeError& e) {
        err << "regime violation: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace oamgrav::cli
