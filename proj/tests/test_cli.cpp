#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "cli/config.hpp"

using namespace oamgrav;
using namespace oamgrav::cli;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const char* env = std::getenv("OAMGRAV_TEST_TMP");
    const fs::path root = env ? fs::path(env) : fs::temp_directory_path() / "oamgrav_cli_tests";
    const fs::path dir = root / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// k chosen so that kappa = 1 for w0 = 1e-3, A = 0.05, L = 0.02
json base_doc() {
    return {{"beam", {{"k", std::sqrt(3.0 * 0.02 * 0.05 * 0.05 / (2.0 * 1e-12))}, {"w0", 1e-3}}},
            {"fluctuation", {{"A", 0.05}, {"L", 0.02}}},
            {"dimensions", {3, 5}},
            {"sweep", {{"start", 0.0}, {"stop", 2.0}, {"count", 11}}}};
}

struct Csv {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t col(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::runtime_error("no column " + name);
    }
    double num(std::size_t row, const std::string& name) const { return std::stod(rows.at(row).at(col(name))); }
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

Csv read_csv(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    Csv c;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            c.comments.push_back(line.substr(2));
        } else if (c.columns.empty()) {
            c.columns = split(line);
        } else {
            c.rows.push_back(split(line));
        }
    }
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path write_config(const fs::path& dir, const json& doc) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << doc.dump(2);
    return p;
}

}  // namespace

TEST_CASE("config: accepted and rejected documents") {
    const auto cfg = parse_config(base_doc());
    CHECK(cfg.dimensions == std::vector<int>{3, 5});
    CHECK(cfg.monte_carlo.n_realizations == 2000);
    CHECK(cfg.sweep.points().size() == 11);
    CHECK(cfg.sweep.points().back() == 2.0);

    auto bad = base_doc();
    bad["beam"]["colour"] = 1;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = base_doc();
    bad["extra"] = true;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = base_doc();
    bad["dimensions"] = {4};
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = base_doc();
    bad["dimensions"] = {27};
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = base_doc();
    bad["beam"]["w0"] = -1.0;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = base_doc();
    bad["beam"]["k"] = "fast";
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = base_doc();
    bad["monte_carlo"] = {{"distance_unit", "parsec"}};
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = base_doc();
    bad["lsymbols"] = {{"path", "fastest"}};
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/oamgrav.json"), ConfigError);

    auto seeded = parse_config(base_doc());
    override_seed(seeded, 77);
    CHECK(seeded.monte_carlo.base_seed == 77);
    CHECK(seeded.document["monte_carlo"]["base_seed"] == 77);
}

TEST_CASE("modes: fundamental peak, vortex null and phase winding") {
    const auto dir = scratch_dir("modes");
    auto doc = base_doc();
    doc["modes"] = {{"l", 0}, {"p", 0}, {"grid_points", 33}, {"half_extent", 2.0}};
    auto r = cmd_modes(parse_config(doc), dir.string());
    REQUIRE(r.files.size() == 1);
    CHECK(fs::path(r.files[0]).filename() == "mode_l0_p0.csv");
    auto c = read_csv(r.files[0]);
    REQUIRE(c.rows.size() == 33u * 33u);
    const std::size_t centre = 16 * 33 + 16;
    CHECK_THAT(c.num(centre, "x"), WithinAbs(0.0, 1e-15));
    CHECK_THAT(c.num(centre, "y"), WithinAbs(0.0, 1e-15));
    const double peak = std::sqrt(2.0 / std::numbers::pi) / 1e-3;
    CHECK_THAT(c.num(centre, "re"), WithinRel(peak, 1e-12));
    CHECK_THAT(c.num(centre, "intensity"), WithinRel(peak * peak, 1e-12));

    doc["modes"]["l"] = 1;
    r = cmd_modes(parse_config(doc), dir.string());
    c = read_csv(r.files[0]);
    CHECK(c.num(centre, "intensity") < 1e-20);
    // on the +x axis the phase is 0, on the +y axis pi/2
    const std::size_t px = 16 * 33 + 24, py = 24 * 33 + 16;
    const bool x_major = c.num(px, "x") > 0.0;
    const std::size_t on_x = x_major ? px : py, on_y = x_major ? py : px;
    CHECK_THAT(c.num(on_x, "phase"), WithinAbs(0.0, 1e-12));
    CHECK_THAT(c.num(on_y, "phase"), WithinAbs(std::numbers::pi / 2, 1e-12));
}

TEST_CASE("lsymbols: both paths agree and the diagonal is imaginary") {
    const auto dir = scratch_dir("lsymbols");
    auto doc = base_doc();
    doc["lsymbols"] = {{"max_l", 2}, {"path", "both"}};
    const auto r = cmd_lsymbols(parse_config(doc), dir.string());
    CHECK(r.exit_code == kExitOk);
    const auto c = read_csv(r.files.at(0));
    CHECK(c.rows.size() == 2u * 25u);
    for (std::size_t i = 0; i < c.rows.size(); ++i)
        if (c.rows[i][c.col("n")] == c.rows[i][c.col("s")])
            CHECK(std::abs(c.num(i, "re")) <= 1e-9 * std::abs(c.num(i, "im")));
}

TEST_CASE("evolve and metrics produce consistent files") {
    const auto dir = scratch_dir("evolve");
    const auto cfg = parse_config(base_doc());
    const auto ev = cmd_evolve(cfg, dir.string());
    REQUIRE(ev.files.size() == 1);
    CHECK(fs::path(ev.files[0]).filename() == "evolve_D3.csv");
    const auto m = cmd_metrics(cfg, dir.string());
    CHECK(m.exit_code == kExitOk);
    const auto c = read_csv(m.files.at(0));
    REQUIRE(c.rows.size() == 2u * 11u);
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
        CHECK_THAT(c.num(i, "trace"), WithinAbs(1.0, 1e-12));
        CHECK(c.num(i, "purity") <= 1.0 + 1e-12);
    }
    CHECK_THAT(c.num(0, "negativity"), WithinAbs(1.0, 1e-10));
    CHECK_THAT(c.num(0, "purity"), WithinAbs(1.0, 1e-12));
}

TEST_CASE("reproduce: curves, decay table and density matrix") {
    const auto dir = scratch_dir("reproduce");
    auto doc = base_doc();
    doc["dimensions"] = {3, 5, 7, 11, 19};
    const auto cfg = parse_config(doc);

    auto r = cmd_reproduce(cfg, "purity", dir.string());
    CHECK(r.exit_code == kExitOk);
    REQUIRE(r.files.size() == 5);
    auto c = read_csv(r.files[0]);
    CHECK_THAT(c.num(0, "purity"), WithinAbs(1.0, 1e-14));
    CHECK(c.num(10, "purity") < c.num(1, "purity"));

    r = cmd_reproduce(cfg, "negativity", dir.string());
    CHECK(r.exit_code == kExitOk);
    c = read_csv(r.files.back());
    CHECK(fs::path(r.files.back()).filename() == "negativity_D19.csv");
    CHECK_THAT(c.num(0, "negativity"), WithinAbs(9.0, 1e-10));

    r = cmd_reproduce(cfg, "decay_table", dir.string());
    c = read_csv(r.files.at(0));
    const std::vector<double> expect{1.48, 0.64, 0.40, 0.20, 0.08};
    REQUIRE(c.rows.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK_THAT(c.num(i, "x3_over_kappa"), WithinAbs(expect[i], 0.01));

    r = cmd_reproduce(cfg, "density_matrix", dir.string());
    c = read_csv(r.files.at(0));
    bool saw_island = false;
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
        const auto a = [&](const char* n) { return std::abs(std::stoi(c.rows[i][c.col(n)])); };
        if (c.num(i, "C") == 0.0) {
            saw_island = true;
            CHECK_THAT(c.num(i, "re"), WithinAbs(1.0 / 7.0, 1e-12));
            CHECK(a("l1") == a("j1"));
        } else {
            CHECK(c.num(i, "re") < 1.0 / 7.0);
        }
    }
    CHECK(saw_island);
    CHECK_THROWS_AS(cmd_reproduce(cfg, "spectrum", dir.string()), ConfigError);
}

TEST_CASE("outputs carry version and config headers and are byte-deterministic") {
    const auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
    const auto cfg = parse_config(base_doc());
    const auto ra = cmd_reproduce(cfg, "negativity", a.string());
    const auto rb = cmd_reproduce(cfg, "negativity", b.string());
    REQUIRE(ra.files.size() == rb.files.size());
    for (std::size_t i = 0; i < ra.files.size(); ++i) CHECK(slurp(ra.files[i]) == slurp(rb.files[i]));
    const auto c = read_csv(ra.files[0]);
    REQUIRE(c.comments.size() >= 2);
    CHECK(c.comments[0] == std::string("oamgrav ") + kVersion + " reproduce negativity");
    CHECK(c.comments[1].rfind("config: ", 0) == 0);
    CHECK(json::parse(c.comments[1].substr(8)) == cfg.document);
}

TEST_CASE("montecarlo: zero strength leaves the state untouched") {
    const auto dir = scratch_dir("montecarlo");
    auto doc = base_doc();
    doc["fluctuation"]["A"] = 0.0;
    doc["monte_carlo"] = {{"n_realizations", 100},
                          {"distances", {0.25, 0.5}},
                          {"distance_unit", "absolute"},
                          {"grid_spacing", 0.005},
                          {"elements", {{1, -1, 0, 0}, {1, -1, -1, 1}}}};
    const auto r = cmd_montecarlo(parse_config(doc), dir.string());
    CHECK(r.exit_code == kExitOk);
    const auto c = read_csv(r.files.at(0));
    REQUIRE(c.rows.size() == 4);
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
        CHECK_THAT(c.num(i, "mean_re"), WithinAbs(1.0 / 3.0, 1e-15));
        CHECK(c.num(i, "se_re") == 0.0);
    }

    doc["monte_carlo"]["distance_unit"] = "kappa";
    CHECK_THROWS_AS(cmd_montecarlo(parse_config(doc), dir.string()), ConfigError);
}

TEST_CASE("decay-distance command") {
    const auto dir = scratch_dir("decay");
    const auto r = cmd_decay_distance(parse_config(base_doc()), dir.string());
    const auto c = read_csv(r.files.at(0));
    REQUIRE(c.rows.size() == 2);
    CHECK_THAT(c.num(0, "x3_over_kappa"), WithinAbs(1.48, 0.01));
    CHECK_THAT(c.num(1, "x3"), WithinAbs(0.64, 0.01));
}

TEST_CASE("run_command maps failures to exit codes") {
    const auto dir = scratch_dir("run");
    std::ostringstream err;
    Invocation inv{"decay-distance", write_config(dir, base_doc()).string(), (dir / "out").string(), std::nullopt, ""};
    CHECK(run_command(inv, err) == kExitOk);
    CHECK(fs::exists(dir / "out" / "decay_distance.csv"));

    inv.config_path = (dir / "missing.json").string();
    CHECK(run_command(inv, err) == kExitUsage);

    std::ofstream(dir / "broken.json") << "{ not json";
    inv.config_path = (dir / "broken.json").string();
    CHECK(run_command(inv, err) == kExitUsage);

    inv = {"reproduce", write_config(dir, base_doc()).string(), (dir / "out").string(), std::nullopt, "nope"};
    CHECK(run_command(inv, err) == kExitUsage);

    // a kappa-relative Monte Carlo distance too short for the correlation length
    auto doc = base_doc();
    doc["monte_carlo"] = {{"n_realizations", 100}, {"distances", {0.1}}};
    inv = {"montecarlo", write_config(dir, doc).string(), (dir / "out").string(), std::uint64_t{5}, ""};
    CHECK(run_command(inv, err) == kExitNumerical);
    CHECK_FALSE(err.str().empty());
}
