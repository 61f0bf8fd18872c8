#pragma once

#include <optional>
#include <string>
#include <vector>

#include "atomarray/fit.hpp"
#include "atomarray/markov.hpp"

namespace atomarray {

cplx free_space_phi(const SystemGeometry& g, std::size_t i1, std::size_t i2);

// Lattice-mediated exchange plus phi, in the conjugated-propagator convention:
// conj(h1^T (delta - M)^-1 g2) + phi. Its real part equals the real part of
// the impurity-impurity element of the adiabatically eliminated Hamiltonian.
cplx effective_interaction(const Resolvent& r, const ImpurityCouplingVector& v1, const ImpurityCouplingVector& v2,
                           cplx phi);
cplx effective_interaction(const CouplingMatrix& m, const ImpurityCouplingVector& v1,
                           const ImpurityCouplingVector& v2, double delta, cplx phi);

double q2(cplx phi_eff, double gamma_eff);

struct TwoImpurityResult {
    cplx phi_eff{0.0};
    cplx phi{0.0};
    double gamma_eff_1 = 0.0, gamma_eff_2 = 0.0;
    double q2 = 0.0;
    double q2_free = 0.0;  // Re phi / gamma_I
    double d = 0.0;
    double delta = 0.0;
    Configuration configuration = Configuration::identical;
};

// Geometry must hold exactly two impurities of the same species.
TwoImpurityResult two_impurity(const SystemGeometry& g, const Resolvent& r);
TwoImpurityResult two_impurity(const SystemGeometry& g, double delta);

// How the lattice detuning is chosen for a study.
struct OperatingPoint {
    enum class Kind {
        absolute,            // value is delta_LI
        band_edge_multiple,  // value * omega_BE
        dark,                // minimum of gamma_eff above the lattice modes
        dark_band,           // closed-form dark detuning from patch band data at k = 0
        dark_in_phase,       // closed-form dark detuning from the finite-array uniform mode
    };
    Kind kind = Kind::dark;
    double value = 0.0;

    static OperatingPoint default_for(Configuration c);
};

OperatingPoint::Kind parse_operating_kind(const std::string& s);
const char* to_string(OperatingPoint::Kind k);

struct DetuningOptions {
    int patch = 40;
    int band_grid = 101;
};

// Resolves the detuning for lattice `config` using a single impurity of the
// given configuration on the central plaquette.
double resolve_detuning(const OperatingPoint& op, const LatticeConfig& config, Configuration c, double gamma_I,
                        const DetuningOptions& opt = {});

struct DistanceScan {
    double a = 0.0;
    double delta = 0.0;
    std::vector<int> m;  // separations in lattice spacings
    std::vector<TwoImpurityResult> rows;
    int region_end = 0;  // last m of the leading run with |Q2| > 3 |Q2_free|
    std::optional<ScalingFit> fit;
    std::string fit_error;
};

DistanceScan distance_scan(const LatticeConfig& config, Configuration c, double gamma_I, double delta,
                           const std::vector<int>& m_list, unsigned threads = 1);

struct SpacingRow {
    double a;
    double q2_identical, q2_orthogonal, q2_free;
    double delta_identical, delta_orthogonal;
};
struct SpacingScan {
    std::vector<SpacingRow> rows;
    std::optional<ScalingFit> identical, orthogonal, free_space;
    std::string fit_error;
};

SpacingScan spacing_scan(const std::vector<double>& a_list, int nx, int ny, double gamma_I,
                         const OperatingPoint& identical_op, const OperatingPoint& orthogonal_op,
                         unsigned threads = 1, const DetuningOptions& opt = {});

struct ReachRow {
    double a;
    double delta;
    int reach;  // largest m with |Q2| > threshold, 0 if none
    double q2_max;
};

std::vector<ReachRow> reach_scan(const std::vector<double>& a_list, int nx, int ny, Configuration c,
                                 double gamma_I, const OperatingPoint& op, double threshold = 1.0,
                                 unsigned threads = 1, const DetuningOptions& opt = {});

}  // namespace atomarray
