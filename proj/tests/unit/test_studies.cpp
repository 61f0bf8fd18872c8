#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"

#include "atomarray/config.hpp"
#include "atomarray/csv.hpp"
#include "atomarray/studies.hpp"

using namespace atomarray;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(ATOMARRAY_BINARY_DIR) / "studies_scratch" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ResultManifest run(const std::string& text, const fs::path& dir, unsigned threads = 1) {
    return run_study(parse_config(text), dir.string(), threads);
}

bool has_meta(const CsvTable& t, const std::string& line) {
    for (const auto& m : t.meta)
        if (m == line) return true;
    return false;
}

// Every output file of a run must be identical between two directories.
void check_same_outputs(const ResultManifest& m, const fs::path& a, const fs::path& b) {
    REQUIRE_FALSE(m.outputs.empty());
    for (const auto& name : m.outputs) {
        INFO(name);
        CHECK(slurp(a / name) == slurp(b / name));
    }
}

int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + ATOMARRAY_CLI + "\" " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p;
}

const char* kSmallMap = R"({
  "study": "impurity-map",
  "lattice": {"n": 4},
  "impurity": {"gamma": 0.01, "configuration": "both"},
  "grids": {"a": [0.1, 0.2], "delta": {"start": -2, "stop": 30, "num": 9}}
})";

}  // namespace

TEST_CASE("band study writes the band table with the config hash") {
    const std::string text = R"({"study": "band", "lattice": {"spacing": 0.2, "n": 2}, "grids": {"k": 11}, "patch": 6})";
    const fs::path dir = scratch("band");
    const ResultManifest m = run(text, dir);
    const CsvTable t = read_csv((dir / "band.csv").string());
    CHECK(t.columns == std::vector<std::string>{"kx", "ky", "J", "Gamma", "in_light_cone"});
    CHECK(t.rows.size() == 121);
    CHECK(has_meta(t, "config_hash: " + parse_config(text).hash()));
    CHECK(m.json["config_hash"] == parse_config(text).hash());
    CHECK(m.json["summary"]["band_edge"].get<double>() > 0.0);
    CHECK(fs::exists(dir / "manifest.json"));
    const auto disk = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(disk["config"] == parse_config(text).normalized());
}

TEST_CASE("impurity map rows cover every cell and match the manifest") {
    const fs::path dir = scratch("map");
    const ResultManifest m = run(kSmallMap, dir);
    const CsvTable t = read_csv((dir / "impurity_map.csv").string());
    const std::vector<std::string> lead{"a", "delta_LI", "re_sigma", "im_sigma", "gamma_eff", "omega_shift",
                                        "re_omega_eff_drive", "im_omega_eff_drive", "q1", "markov_flag"};
    REQUIRE(t.columns.size() >= lead.size());
    CHECK(std::vector<std::string>(t.columns.begin(), t.columns.begin() + lead.size()) == lead);
    CHECK(t.rows.size() == 2 * 9 * 2);
    CHECK(m.json["cells"]["total"] == t.rows.size());
    CHECK(m.json["cell_status"].size() == t.rows.size());

    const std::set<std::string> allowed{"ok", "pole", "markov-warning"};
    const auto status_col = std::find(t.columns.begin(), t.columns.end(), "status") - t.columns.begin();
    for (const auto& r : t.rows) {
        CHECK(r.size() == t.columns.size());
        CHECK(allowed.count(r[status_col]) == 1);
    }
    const CsvTable curves = read_csv((dir / "impurity_map_curves.csv").string());
    CHECK(curves.rows.size() == 4);
    CHECK(has_meta(curves, "config_hash: " + parse_config(kSmallMap).hash()));
}

TEST_CASE("impurity map without a delta grid uses operating points per size") {
    const std::string text = R"({
      "study": "impurity-map",
      "impurity": {"gamma": 0.01, "configuration": "both"},
      "grids": {"a": [0.2], "sizes": [2, 4]}
    })";
    const fs::path dir = scratch("sizes");
    run(text, dir);
    const CsvTable t = read_csv((dir / "impurity_map.csv").string());
    CHECK(t.rows.size() == 4);
    const auto n_col = std::find(t.columns.begin(), t.columns.end(), "n") - t.columns.begin();
    std::set<std::string> ns;
    for (const auto& r : t.rows) ns.insert(r[n_col]);
    CHECK(ns == std::set<std::string>{"2", "4"});
}

TEST_CASE("serial and parallel runs give byte-identical CSVs") {
    SUBCASE("impurity map") {
        const fs::path a = scratch("det_map_1"), b = scratch("det_map_4");
        const auto m = run(kSmallMap, a, 1);
        run(kSmallMap, b, 4);
        check_same_outputs(m, a, b);
    }
    SUBCASE("two-impurity map") {
        const std::string text = R"({
          "study": "two-impurity-map", "lattice": {"n": 4},
          "impurity": {"gamma": 0.01, "configuration": "both"},
          "grids": {"a": [0.1, 0.2], "delta": [5, 10, 20], "d": [1]}
        })";
        const fs::path a = scratch("det_two_1"), b = scratch("det_two_3");
        const auto m = run(text, a, 1);
        run(text, b, 3);
        check_same_outputs(m, a, b);
    }
    SUBCASE("distance and reach scans") {
        const std::string dist = R"({"study": "distance-scan", "lattice": {"spacing": 0.2, "n": 8},
                                     "impurity": {"configuration": "identical"}})";
        const std::string reach = R"({"study": "reach-scan", "lattice": {"n": 6},
                                      "impurity": {"configuration": "both"}, "grids": {"a": [0.1, 0.2]}})";
        for (const auto& text : {dist, reach}) {
            const fs::path a = scratch("det_scan_1"), b = scratch("det_scan_4");
            const auto m = run(text, a, 1);
            run(text, b, 4);
            check_same_outputs(m, a, b);
        }
    }
    SUBCASE("rerun in the same thread count") {
        const fs::path a = scratch("det_again_1"), b = scratch("det_again_2");
        const auto m = run(kSmallMap, a, 2);
        run(kSmallMap, b, 2);
        check_same_outputs(m, a, b);
    }
}

TEST_CASE("scan schemas") {
    const fs::path d = scratch("dist");
    run(R"({"study": "distance-scan", "lattice": {"spacing": 0.2, "n": 8}})", d);
    const CsvTable dist = read_csv((d / "distance_scan.csv").string());
    const std::vector<std::string> dlead{"d", "re_phi", "im_phi", "gamma_eff", "q2", "config"};
    CHECK(std::vector<std::string>(dist.columns.begin(), dist.columns.begin() + 6) == dlead);
    // Identical species by default, m = 1 .. n - 2.
    CHECK(dist.rows.size() == 6);

    const fs::path s = scratch("spacing");
    const auto m = run(R"({"study": "spacing-scan", "lattice": {"n": 6}, "grids": {"a": [0.1, 0.15]}})", s);
    const CsvTable sp = read_csv((s / "spacing_scan.csv").string());
    const std::vector<std::string> slead{"a", "q2max_identical", "q2max_orthogonal", "q2_free"};
    CHECK(std::vector<std::string>(sp.columns.begin(), sp.columns.begin() + 4) == slead);
    CHECK(sp.rows.size() == 2);
    CHECK(m.json["summary"].contains("identical"));

    const fs::path t = scratch("two");
    run(R"({"study": "two-impurity-map", "lattice": {"n": 4},
            "grids": {"a": [0.2], "delta": [5, 10], "d": [1]}})", t);
    const CsvTable two = read_csv((t / "two_impurity_map.csv").string());
    CHECK(std::vector<std::string>(two.columns.begin(), two.columns.begin() + 3) ==
          std::vector<std::string>{"a", "delta_LI", "q2"});
}

TEST_CASE("dynamics writes full and reduced time series") {
    const std::string text = R"({
      "study": "dynamics", "lattice": {"spacing": 0.2, "n": 4},
      "impurity": {"gamma": 0.01, "configuration": "identical"},
      "grids": {"d": [1], "t": {"kind": "uniform", "points": 50}}
    })";
    const fs::path dir = scratch("dyn");
    const ResultManifest m = run(text, dir);
    const CsvTable full = read_csv((dir / "timeseries.csv").string());
    const CsvTable red = read_csv((dir / "timeseries_impurities.csv").string());
    CHECK(full.columns == std::vector<std::string>{"t", "site_index", "re_c", "im_c", "population"});
    CHECK(red.columns ==
          std::vector<std::string>{"t", "p_impurity_1", "p_impurity_2", "p_impurities", "p_total"});
    // 16 lattice sites and two impurities per time point.
    CHECK(full.rows.size() == red.rows.size() * 18);
    CHECK(std::stod(red.rows.front()[1]) == doctest::Approx(1.0));
    double last = 2.0;
    for (const auto& r : red.rows) {
        const double p = std::stod(r.back());
        CHECK(p <= last + 1e-12);
        last = p;
    }
    CHECK(m.json["summary"]["prediction"].contains("re_phi_eff"));
}

TEST_CASE("toy check study passes and records every comparison") {
    const fs::path dir = scratch("toy");
    const ResultManifest m = run(R"({"study": "toy-check", "grids": {"a": [0.1]}, "toy_detunings": 4})", dir);
    CHECK(m.json["summary"]["failed"] == 0);
    const CsvTable t = read_csv((dir / "toy_check.csv").string());
    CHECK(t.rows.size() == m.json["summary"]["checks"].get<std::size_t>());
    CHECK(t.rows.size() > 0);
}

TEST_CASE("command line exit codes") {
    const fs::path dir = scratch("cli");
    const fs::path good = write_file(dir / "good.json", R"({"study": "toy-check", "grids": {"a": [0.2]}, "toy_detunings": 2})");
    const fs::path bad = write_file(dir / "bad.json", R"({"study": "toy-check", "colour": 1})");
    const fs::path broken = write_file(dir / "broken.json", "{ not json");
    const std::string out = " --out \"" + (dir / "out").string() + "\"";

    CHECK(cli("toy-check --config \"" + good.string() + "\"" + out) == 0);
    CHECK(fs::exists(dir / "out" / "toy_check.csv"));
    CHECK(cli("toy-check --config \"" + bad.string() + "\"" + out) == 2);
    CHECK(cli("toy-check --config \"" + broken.string() + "\"" + out) == 2);
    CHECK(cli("band --config \"" + good.string() + "\"" + out) == 2);
    CHECK(cli("toy-check --config \"" + (dir / "missing.json").string() + "\"" + out) == 2);
    CHECK(cli("no-such-study --config \"" + good.string() + "\"") == 2);
    CHECK(cli("--version") == 0);
}
