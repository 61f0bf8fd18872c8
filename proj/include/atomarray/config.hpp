#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "atomarray/geometry.hpp"
#include "atomarray/markov.hpp"
#include "atomarray/two_impurity.hpp"

namespace atomarray {

enum class StudyKind { band, impurity_map, two_impurity_map, distance_scan, spacing_scan, reach_scan, dynamics, toy_check };

StudyKind parse_study(const std::string& s);
const char* to_string(StudyKind k);

struct TimeGridSpec {
    std::string kind = "auto";  // auto | uniform | windowed
    double t_max = 0.0;         // uniform: end time; 0 means 10 / predicted linewidth
    int points = 2000;
    int windows = 12;
    int per_period = 40;
    double periods = 3.0;
    double span = 3.0;  // windowed: total time in units of 1 / predicted linewidth
};

struct RunConfig {
    StudyKind study = StudyKind::toy_check;
    LatticeConfig lattice;
    ImpuritySpec species;                    // shared by generated placements
    std::vector<Configuration> configurations;
    std::vector<ImpuritySpec> impurities;    // explicit placements (dynamics)
    std::vector<double> a_grid;
    std::vector<double> delta_grid;
    std::vector<int> d_grid;                 // separations in lattice spacings
    std::vector<int> sizes;                  // square array sizes for convergence tables
    int k_grid = 101;
    int patch = 40;
    PatchWindow window = PatchWindow::none;  // band study only
    TimeGridSpec t_grid;
    std::optional<OperatingPoint> detuning;  // per-configuration default when unset
    double omega_L = 0.01;
    std::optional<double> omega_I;           // plane-wave value when unset
    std::string method = "solve";            // solve | modal
    double threshold = 1.0;
    int toy_detunings = 20;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    unsigned threads = 0;                    // 0: environment or hardware

    OperatingPoint detuning_for(Configuration c) const {
        return detuning ? *detuning : OperatingPoint::default_for(c);
    }
    DriveSpec drive() const;
    // Canonical form with defaults applied. Excludes the output directory
    // and thread count so the hash is stable across execution settings.
    nlohmann::json normalized() const;
    std::string hash() const;
};

// Throws ConfigError naming the offending field.
RunConfig parse_config(const std::string& text);

nlohmann::json geometry_to_json(const SystemGeometry& g);

}  // namespace atomarray
