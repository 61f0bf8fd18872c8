#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atomarray/geometry.hpp"

namespace atomarray {

// 2x2 plaquette with one impurity at its center. Atoms are ordered
// counterclockwise starting from the lower-left corner.
struct ToyCouplings {
    double a = 0.0;
    double gamma_I = 0.0;
    double gamma_L = kGammaL;
    Configuration configuration = Configuration::identical;
    double J1 = 0, Gamma1 = 0;  // (a, 0)
    double J2 = 0, Gamma2 = 0;  // (a, a)
    double Js = 0, Gammas = 0;  // impurity to corner, includes sqrt(gamma_I / gamma_L)

    double J_par() const { return 2 * J1 + J2; }
    double Gamma_par() const { return gamma_L + 2 * Gamma1 + Gamma2; }
    double J_perp() const { return -2 * J1 + J2; }
    double Gamma_perp() const { return gamma_L - 2 * Gamma1 + Gamma2; }
    double J_tilde() const { return 2 * Js; }
    double Gamma_tilde() const { return 2 * Gammas; }
    double Gamma3() const { return Gammas / std::sqrt(gamma_I / gamma_L); }
};

ToyCouplings toy_couplings(double a, double gamma_I, Configuration c = Configuration::identical,
                           double gamma_L = kGammaL);

// Lattice positions in toy order, centered on the impurity at the origin.
std::array<Eigen::Vector2d, 4> toy_positions(double a);
// Toy index -> row-major index of build_geometry for a 2x2 lattice.
inline constexpr std::array<int, 4> kToyToRowMajor{0, 1, 3, 2};

Eigen::Matrix4cd toy_lattice_matrix(const ToyCouplings& tc);
// v_par, v_perp, v_M1, v_M2 as columns.
Eigen::Matrix4d toy_lattice_modes();
// Mode eigenvalues with the detuning term removed, same column order.
std::array<cplx, 4> toy_mode_eigenvalues(const ToyCouplings& tc);

cplx toy_self_energy_identical(const ToyCouplings& tc, double delta);
cplx toy_self_energy_orthogonal(const ToyCouplings& tc, double delta);
double toy_im_self_energy_identical(const ToyCouplings& tc, double delta);

cplx toy_rabi_identical(const ToyCouplings& tc, double delta, cplx omega_L, cplx omega_I);
// Lattice-mediated drive only; omega_perp is the drive projected on v_perp.
cplx toy_rabi_orthogonal(const ToyCouplings& tc, double delta, cplx omega_perp);

double toy_dark_detuning(const ToyCouplings& tc);
double toy_optimal_linewidth(const ToyCouplings& tc);
double toy_optimal_shift(const ToyCouplings& tc);

struct SmallALimits {
    double gamma_eff;
    double omega_eff;
};
SmallALimits toy_small_a_limits(const ToyCouplings& tc, double omega_I);

struct DressedState {
    cplx eigenvalue;
    Eigen::Vector2cd amplitude;  // (in-phase lattice mode, impurity)
    double alpha;
};
struct DressedPair {
    DressedState dark;
    DressedState radiant;
};
DressedPair toy_dressed_states(const ToyCouplings& tc, double delta);

// Pipeline-versus-closed-form comparisons used by the toy-check study.
struct OracleCheck {
    std::string quantity;
    double a;
    double delta;
    double pipeline_re, pipeline_im;
    double oracle_re, oracle_im;
    double rel_error;
    double tolerance;
    bool pass;
};
std::vector<OracleCheck> toy_check(const std::vector<double>& spacings, int detunings_per_spacing,
                                   double gamma_I, unsigned seed);

}  // namespace atomarray
