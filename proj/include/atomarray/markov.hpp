#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "atomarray/coupling.hpp"

namespace atomarray {

struct DriveSpec {
    cplx omega_L{0.0};  // per lattice atom
    cplx omega_I{0.0};  // bare impurity drive
    // Per-atom lattice drive; uniform omega_L (normal incidence) when empty.
    std::optional<Eigen::VectorXcd> lattice_profile;

    // Normal-incidence plane wave: the impurity sees the same field, so its
    // Rabi frequency scales with the dipole moment, sqrt(gamma_I / gamma_L).
    static DriveSpec plane_wave(double omega_L, double gamma_I, double gamma_L = kGammaL);

    Eigen::VectorXcd lattice_vector(std::size_t n) const;
    bool weak(double gamma_L = kGammaL) const { return std::abs(omega_L) / gamma_L < 0.1; }
};

struct EffectiveParams {
    cplx sigma{0.0};
    double gamma_eff = 0.0;    // gamma_I - 2 Im sigma
    double omega_shift = 0.0;  // Re sigma
    cplx omega_eff{0.0};
    double q1 = 0.0;           // |omega_eff| / gamma_eff
};

// LU factorization of (delta - M), shared by every right-hand side at one
// detuning. Rejects detunings sitting on an undamped pole.
class Resolvent {
public:
    Resolvent(const CouplingMatrix& m, double delta, const ModalDecomposition* spectrum = nullptr);

    Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const { return lu_.solve(b); }
    double delta() const { return delta_; }

private:
    double delta_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
};

cplx self_energy(const Resolvent& r, const ImpurityCouplingVector& g);
cplx self_energy(const CouplingMatrix& m, const ImpurityCouplingVector& g, double delta);
cplx self_energy_modal(const ModalDecomposition& md, const ImpurityCouplingVector& g, double delta);

// Mode weights w_n so that sigma(delta) = sum_n w_n / (delta - lambda_n).
Eigen::VectorXcd modal_weights(const ModalDecomposition& md, const ImpurityCouplingVector& g);

EffectiveParams effective_params(cplx sigma, double gamma_I, cplx omega_eff = 0.0);

cplx effective_rabi(const Resolvent& r, const ImpurityCouplingVector& g, const DriveSpec& drive);
cplx effective_rabi(const CouplingMatrix& m, const ImpurityCouplingVector& g, double delta, const DriveSpec& drive);

// Lattice mode energy/decay and impurity projection at one quasimomentum.
struct ModeData {
    double J, Gamma;
    double J_tilde, Gamma_tilde;
};

double optimal_dark_detuning(const ModeData& m);

// Patch band structure for (J, Gamma); the impurity projection is the
// discrete Fourier sum of its coupling vector over the finite array.
ModeData band_mode_data(const LatticeSum& band, const SystemGeometry& g, const ImpurityCouplingVector& v,
                        std::size_t impurity_index, const Eigen::Vector2d& k = Eigen::Vector2d::Zero());

// Projections on the normalized uniform vector of the finite array.
ModeData in_phase_mode_data(const CouplingMatrix& m, const ImpurityCouplingVector& v);

// Detuning above the highest lattice mode that minimizes gamma_eff, from a
// coarse scan of the mode sum followed by Brent refinement.
double minimize_linewidth(const ModalDecomposition& md, const ImpurityCouplingVector& g, double gamma_I);

// True when sigma changes by more than 20 % across delta +- gamma_eff.
bool markov_warning(const CouplingMatrix& m, const ImpurityCouplingVector& g, double delta, cplx sigma,
                    double gamma_eff);
bool markov_warning_modal(const ModalDecomposition& md, const ImpurityCouplingVector& g, double delta, cplx sigma,
                          double gamma_eff);

}  // namespace atomarray
