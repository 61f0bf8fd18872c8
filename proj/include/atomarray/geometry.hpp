#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atomarray/green.hpp"

namespace atomarray {

enum class Configuration { identical, orthogonal };

const char* to_string(Configuration c);

struct LatticeConfig {
    double spacing = 0.2;  // a, in wavelengths
    int nx = 10;
    int ny = 10;
    double gamma_L = kGammaL;
    Handedness handedness = Handedness::right;

    void validate() const;  // throws DomainError
    DipolePolarization dipole() const { return circular_dipole(handedness); }
};

struct ImpuritySpec {
    std::array<int, 2> plaquette{0, 0};
    // In-plaquette offset from the lower-left atom; plaquette center when unset.
    std::optional<Eigen::Vector2d> offset;
    double gamma = 0.01;
    Configuration configuration = Configuration::identical;
};

struct PlacedImpurity {
    ImpuritySpec spec;
    Displacement position;
    Handedness handedness;
    DipolePolarization dipole() const { return circular_dipole(handedness); }
};

struct SystemGeometry {
    LatticeConfig lattice;
    std::vector<Displacement> lattice_positions;  // row-major: index = j * nx + i
    std::vector<PlacedImpurity> impurities;
    std::vector<std::string> warnings;

    std::size_t lattice_size() const { return lattice_positions.size(); }
    std::size_t size() const { return lattice_positions.size() + impurities.size(); }
    Displacement position(std::size_t global_index) const;
};

SystemGeometry build_geometry(const LatticeConfig& config, const std::vector<ImpuritySpec>& impurities);

double impurity_separation(const SystemGeometry& g, std::size_t index_1, std::size_t index_2);

// Plaquette whose lower-left atom sits at ((nx-2)/2, (ny-2)/2).
std::array<int, 2> central_plaquette(const LatticeConfig& config);

// Two plaquettes m apart along the central row, centered on the array.
std::array<std::array<int, 2>, 2> symmetric_pair(const LatticeConfig& config, int m);

}  // namespace atomarray
