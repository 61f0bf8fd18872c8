#include "atomarray/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "atomarray/csv.hpp"

namespace atomarray {

using nlohmann::json;

namespace {

const char* kStudies[] = {"band", "impurity-map", "two-impurity-map", "distance-scan",
                          "spacing-scan", "reach-scan", "dynamics", "toy-check"};

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError(join(path, k), "unknown field");
}

enum class Unit { length, rate, time, none };

const char* unit_name(Unit u) {
    switch (u) {
        case Unit::length: return "lambda";
        case Unit::rate: return "gammaL";
        case Unit::time: return "1/gammaL";
        case Unit::none: return "";
    }
    return "";
}

// Accepts a bare number or a string "<number> <unit>".
double quantity(const json& j, const std::string& path, Unit u) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        std::istringstream is(j.get<std::string>());
        double v;
        std::string unit;
        if (!(is >> v)) throw ConfigError(path, "expected a number with optional unit suffix");
        is >> unit;
        std::string extra;
        if (is >> extra) throw ConfigError(path, "trailing text after unit");
        if (!unit.empty() && unit != unit_name(u))
            throw ConfigError(path, std::string("unit '") + unit + "' does not match expected '" + unit_name(u) + "'");
        return v;
    }
    throw ConfigError(path, "expected a number");
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<int>();
}

std::string string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

std::vector<double> real_grid(const json& j, const std::string& path, Unit u) {
    std::vector<double> out;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(quantity(j[i], path + "[" + std::to_string(i) + "]", u));
        return out;
    }
    check_keys(j, path, {"start", "stop", "num", "spacing"});
    if (!j.contains("start") || !j.contains("stop") || !j.contains("num"))
        throw ConfigError(path, "range grids need start, stop and num");
    const double a = quantity(j["start"], join(path, "start"), u);
    const double b = quantity(j["stop"], join(path, "stop"), u);
    const int n = integer(j["num"], join(path, "num"));
    const std::string sp = j.contains("spacing") ? string(j["spacing"], join(path, "spacing")) : "linear";
    if (n < 1) throw ConfigError(join(path, "num"), "must be at least 1");
    if (sp != "linear" && sp != "geometric") throw ConfigError(join(path, "spacing"), "expected linear or geometric");
    if (sp == "geometric" && !(a > 0 && b > 0)) throw ConfigError(path, "geometric grids need positive bounds");
    for (int i = 0; i < n; ++i) {
        const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        out.push_back(sp == "linear" ? a + (b - a) * f : a * std::pow(b / a, f));
    }
    return out;
}

std::vector<int> int_grid(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(integer(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

Handedness parse_hand(const json& j, const std::string& path) {
    const std::string s = string(j, path);
    if (s == "right") return Handedness::right;
    if (s == "left") return Handedness::left;
    throw ConfigError(path, "expected right or left");
}

Configuration parse_conf(const json& j, const std::string& path) {
    const std::string s = string(j, path);
    if (s == "identical") return Configuration::identical;
    if (s == "orthogonal") return Configuration::orthogonal;
    throw ConfigError(path, "expected identical or orthogonal");
}

void parse_species(const json& j, const std::string& path, ImpuritySpec& s, bool placed) {
    if (placed)
        check_keys(j, path, {"plaquette", "offset", "gamma", "configuration"});
    else
        check_keys(j, path, {"gamma", "configuration"});
    if (j.contains("gamma")) s.gamma = quantity(j["gamma"], join(path, "gamma"), Unit::rate);
    if (!(s.gamma > 0)) throw ConfigError(join(path, "gamma"), "must be positive");
    if (j.contains("configuration")) s.configuration = parse_conf(j["configuration"], join(path, "configuration"));
    if (!placed) return;
    if (!j.contains("plaquette")) throw ConfigError(join(path, "plaquette"), "required");
    const auto p = int_grid(j["plaquette"], join(path, "plaquette"));
    if (p.size() != 2) throw ConfigError(join(path, "plaquette"), "expected [i, j]");
    s.plaquette = {p[0], p[1]};
    if (j.contains("offset")) {
        const auto& o = j["offset"];
        if (!o.is_array() || o.size() != 2) throw ConfigError(join(path, "offset"), "expected [x, y]");
        s.offset = Eigen::Vector2d(quantity(o[0], join(path, "offset[0]"), Unit::length),
                                   quantity(o[1], join(path, "offset[1]"), Unit::length));
    }
}

}  // namespace

StudyKind parse_study(const std::string& s) {
    for (int i = 0; i < 8; ++i)
        if (s == kStudies[i]) return static_cast<StudyKind>(i);
    throw ConfigError("study", "unknown study '" + s + "'");
}

const char* to_string(StudyKind k) { return kStudies[static_cast<int>(k)]; }

DriveSpec RunConfig::drive() const {
    DriveSpec d = DriveSpec::plane_wave(omega_L, species.gamma, lattice.gamma_L);
    if (omega_I) d.omega_I = *omega_I;
    return d;
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    check_keys(j, "", {"study", "units", "lattice", "impurity", "impurities", "grids", "detuning", "drive", "method",
                       "threshold", "patch", "window", "toy_detunings", "seed", "output", "threads"});
    RunConfig c;
    if (!j.contains("study")) throw ConfigError("study", "required");
    c.study = parse_study(string(j["study"], "study"));

    if (j.contains("units")) {
        check_keys(j["units"], "units", {"length", "rate", "time"});
        for (auto [key, want] : {std::pair{"length", "lambda"}, std::pair{"rate", "gammaL"}, std::pair{"time", "1/gammaL"}})
            if (j["units"].contains(key) && string(j["units"][key], join("units", key)) != want)
                throw ConfigError(join("units", key), std::string("only '") + want + "' is supported");
    }

    if (j.contains("lattice")) {
        const json& l = j["lattice"];
        check_keys(l, "lattice", {"spacing", "nx", "ny", "n", "handedness"});
        if (l.contains("spacing")) c.lattice.spacing = quantity(l["spacing"], "lattice.spacing", Unit::length);
        if (l.contains("n")) c.lattice.nx = c.lattice.ny = integer(l["n"], "lattice.n");
        if (l.contains("nx")) c.lattice.nx = integer(l["nx"], "lattice.nx");
        if (l.contains("ny")) c.lattice.ny = integer(l["ny"], "lattice.ny");
        if (l.contains("handedness")) c.lattice.handedness = parse_hand(l["handedness"], "lattice.handedness");
    }
    if (!(c.lattice.spacing > 0)) throw ConfigError("lattice.spacing", "must be positive");
    if (c.lattice.nx < 2 || c.lattice.ny < 2) throw ConfigError("lattice", "needs at least 2 atoms per side");

    bool both = false;
    if (j.contains("impurity")) {
        json sp = j["impurity"];
        if (sp.is_object() && sp.contains("configuration") && sp["configuration"] == "both") {
            both = true;
            sp.erase("configuration");
        }
        parse_species(sp, "impurity", c.species, false);
    }
    c.configurations = both ? std::vector{Configuration::identical, Configuration::orthogonal}
                            : std::vector{c.species.configuration};
    if (j.contains("impurities")) {
        const json& arr = j["impurities"];
        if (!arr.is_array()) throw ConfigError("impurities", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            ImpuritySpec s = c.species;
            parse_species(arr[i], "impurities[" + std::to_string(i) + "]", s, true);
            c.impurities.push_back(s);
        }
    }

    if (j.contains("grids")) {
        const json& g = j["grids"];
        check_keys(g, "grids", {"a", "delta", "d", "k", "t", "sizes"});
        if (g.contains("a")) c.a_grid = real_grid(g["a"], "grids.a", Unit::length);
        if (g.contains("delta")) c.delta_grid = real_grid(g["delta"], "grids.delta", Unit::rate);
        if (g.contains("d")) c.d_grid = int_grid(g["d"], "grids.d");
        if (g.contains("sizes")) c.sizes = int_grid(g["sizes"], "grids.sizes");
        if (g.contains("k")) c.k_grid = integer(g["k"], "grids.k");
        if (g.contains("t")) {
            const json& t = g["t"];
            check_keys(t, "grids.t", {"kind", "t_max", "points", "windows", "per_period", "periods", "span"});
            if (t.contains("kind")) c.t_grid.kind = string(t["kind"], "grids.t.kind");
            if (c.t_grid.kind != "auto" && c.t_grid.kind != "uniform" && c.t_grid.kind != "windowed")
                throw ConfigError("grids.t.kind", "expected auto, uniform or windowed");
            if (t.contains("t_max")) c.t_grid.t_max = quantity(t["t_max"], "grids.t.t_max", Unit::time);
            if (t.contains("points")) c.t_grid.points = integer(t["points"], "grids.t.points");
            if (t.contains("windows")) c.t_grid.windows = integer(t["windows"], "grids.t.windows");
            if (t.contains("per_period")) c.t_grid.per_period = integer(t["per_period"], "grids.t.per_period");
            if (t.contains("periods")) c.t_grid.periods = quantity(t["periods"], "grids.t.periods", Unit::none);
            if (t.contains("span")) c.t_grid.span = quantity(t["span"], "grids.t.span", Unit::none);
            if (c.t_grid.points < 2) throw ConfigError("grids.t.points", "must be at least 2");
        }
    }
    if (j.contains("detuning")) {
        const json& d = j["detuning"];
        check_keys(d, "detuning", {"kind", "value"});
        OperatingPoint op;
        if (!d.contains("kind")) throw ConfigError("detuning.kind", "required");
        try {
            op.kind = parse_operating_kind(string(d["kind"], "detuning.kind"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("detuning.kind", e.what());
        }
        const bool needs_value = op.kind == OperatingPoint::Kind::absolute || op.kind == OperatingPoint::Kind::band_edge_multiple;
        if (needs_value && !d.contains("value")) throw ConfigError("detuning.value", "required for this kind");
        if (d.contains("value"))
            op.value = quantity(d["value"], "detuning.value",
                                op.kind == OperatingPoint::Kind::absolute ? Unit::rate : Unit::none);
        c.detuning = op;
    }
    if (j.contains("drive")) {
        const json& d = j["drive"];
        check_keys(d, "drive", {"omega_L", "omega_I"});
        if (d.contains("omega_L")) c.omega_L = quantity(d["omega_L"], "drive.omega_L", Unit::rate);
        if (d.contains("omega_I")) c.omega_I = quantity(d["omega_I"], "drive.omega_I", Unit::rate);
    }
    if (j.contains("method")) {
        c.method = string(j["method"], "method");
        if (c.method != "solve" && c.method != "modal") throw ConfigError("method", "expected solve or modal");
    }
    if (j.contains("threshold")) c.threshold = quantity(j["threshold"], "threshold", Unit::none);
    if (j.contains("patch")) c.patch = integer(j["patch"], "patch");
    if (c.patch < 2) throw ConfigError("patch", "must be at least 2");
    if (j.contains("window")) {
        const std::string w = string(j["window"], "window");
        if (w == "none")
            c.window = PatchWindow::none;
        else if (w == "fejer")
            c.window = PatchWindow::fejer;
        else
            throw ConfigError("window", "expected none or fejer");
    }
    if (j.contains("toy_detunings")) c.toy_detunings = integer(j["toy_detunings"], "toy_detunings");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output")) {
        check_keys(j["output"], "output", {"dir"});
        if (j["output"].contains("dir")) c.out_dir = string(j["output"]["dir"], "output.dir");
    }
    if (j.contains("threads")) {
        const int t = integer(j["threads"], "threads");
        if (t < 0) throw ConfigError("threads", "must be non-negative");
        c.threads = static_cast<unsigned>(t);
    }

    // Study-specific defaults and non-empty grid checks.
    switch (c.study) {
        case StudyKind::toy_check:
            if (c.a_grid.empty()) c.a_grid = {0.05, 0.1, 0.2, 0.3};
            if (c.toy_detunings < 1) throw ConfigError("toy_detunings", "must be positive");
            break;
        case StudyKind::band:
            if (c.k_grid < 2) throw ConfigError("grids.k", "must be at least 2");
            break;
        case StudyKind::impurity_map:
            // Without a delta grid each cell sits at its configuration's operating point.
            if (c.a_grid.empty()) throw ConfigError("grids.a", "required and non-empty for impurity-map");
            break;
        case StudyKind::two_impurity_map:
            if (c.a_grid.empty()) throw ConfigError("grids.a", "required and non-empty");
            if (c.delta_grid.empty()) throw ConfigError("grids.delta", "required and non-empty");
            if (c.d_grid.empty()) c.d_grid = {1};
            if (c.d_grid.size() != 1) throw ConfigError("grids.d", "two-impurity-map takes a single separation");
            break;
        case StudyKind::distance_scan:
            if (c.d_grid.empty())
                for (int m = 1; m <= c.lattice.nx - 2; ++m) c.d_grid.push_back(m);
            break;
        case StudyKind::spacing_scan:
        case StudyKind::reach_scan:
            if (c.a_grid.empty()) throw ConfigError("grids.a", "required and non-empty");
            break;
        case StudyKind::dynamics:
            if (c.impurities.empty() && c.d_grid.empty()) c.d_grid = {1};
            if (c.impurities.empty() && c.d_grid.size() != 1) throw ConfigError("grids.d", "dynamics takes a single separation");
            break;
    }
    for (int m : c.d_grid)
        if (m < 1 || m > c.lattice.nx - 2) throw ConfigError("grids.d", "separation " + std::to_string(m) + " does not fit the lattice");
    for (int n : c.sizes)
        if (n < 2) throw ConfigError("grids.sizes", "sizes must be at least 2");
    for (double a : c.a_grid)
        if (!(a > 0)) throw ConfigError("grids.a", "spacings must be positive");
    return c;
}

json RunConfig::normalized() const {
    json j;
    j["study"] = to_string(study);
    j["lattice"] = {{"spacing", lattice.spacing}, {"nx", lattice.nx}, {"ny", lattice.ny},
                    {"handedness", to_string(lattice.handedness)}, {"gamma_L", lattice.gamma_L}};
    json confs = json::array();
    for (auto cf : configurations) confs.push_back(to_string(cf));
    j["impurity"] = {{"gamma", species.gamma}, {"configurations", confs}};
    json imps = json::array();
    for (const auto& s : impurities) {
        json o = {{"plaquette", {s.plaquette[0], s.plaquette[1]}}, {"gamma", s.gamma},
                  {"configuration", to_string(s.configuration)}};
        if (s.offset) o["offset"] = {s.offset->x(), s.offset->y()};
        imps.push_back(o);
    }
    j["impurities"] = imps;
    j["grids"] = {{"a", a_grid}, {"delta", delta_grid}, {"d", d_grid}, {"sizes", sizes}, {"k", k_grid},
                  {"t", {{"kind", t_grid.kind}, {"t_max", t_grid.t_max}, {"points", t_grid.points},
                         {"windows", t_grid.windows}, {"per_period", t_grid.per_period},
                         {"periods", t_grid.periods}, {"span", t_grid.span}}}};
    if (detuning)
        j["detuning"] = {{"kind", to_string(detuning->kind)}, {"value", detuning->value}};
    else
        j["detuning"] = nullptr;
    j["drive"] = {{"omega_L", omega_L}, {"omega_I", omega_I ? json(*omega_I) : json(nullptr)}};
    j["method"] = method;
    j["threshold"] = threshold;
    j["patch"] = patch;
    j["window"] = window == PatchWindow::fejer ? "fejer" : "none";
    j["toy_detunings"] = toy_detunings;
    j["seed"] = seed;
    return j;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(normalized().dump())); }

json geometry_to_json(const SystemGeometry& g) {
    json j;
    j["lattice"] = {{"spacing", g.lattice.spacing}, {"nx", g.lattice.nx}, {"ny", g.lattice.ny},
                    {"handedness", to_string(g.lattice.handedness)}, {"gamma_L", g.lattice.gamma_L}};
    json pos = json::array();
    for (const auto& p : g.lattice_positions) pos.push_back({p.x(), p.y(), p.z()});
    j["lattice_positions"] = pos;
    json imps = json::array();
    for (const auto& i : g.impurities)
        imps.push_back({{"position", {i.position.x(), i.position.y(), i.position.z()}},
                        {"plaquette", {i.spec.plaquette[0], i.spec.plaquette[1]}},
                        {"gamma", i.spec.gamma},
                        {"configuration", to_string(i.spec.configuration)},
                        {"handedness", to_string(i.handedness)}});
    j["impurities"] = imps;
    return j;
}

}  // namespace atomarray
