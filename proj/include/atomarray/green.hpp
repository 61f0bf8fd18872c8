#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "atomarray/errors.hpp"

namespace atomarray {

using cplx = std::complex<double>;

// Natural units: lengths in lattice wavelengths, rates in lattice linewidths.
inline constexpr double kWavelength = 1.0;
inline constexpr double kOmegaL = 2.0 * std::numbers::pi / kWavelength;
inline constexpr double kGammaL = 1.0;

using Displacement = Eigen::Vector3d;
using GreenTensor = Eigen::Matrix3cd;

enum class Handedness { right, left };

Handedness opposite(Handedness h);
const char* to_string(Handedness h);

class DipolePolarization {
public:
    // Normalizes v; throws DomainError for a zero vector.
    explicit DipolePolarization(const Eigen::Vector3cd& v);

    static DipolePolarization circular(Handedness h);

    const Eigen::Vector3cd& vector() const { return d_; }
    // <this, other> with the conjugate on this.
    cplx inner(const DipolePolarization& other) const { return d_.dot(other.d_); }

private:
    Eigen::Vector3cd d_;
};

DipolePolarization circular_dipole(Handedness h);

struct PairCoupling {
    cplx value;  // J - i Gamma / 2
    double J() const { return value.real(); }
    double Gamma() const { return -2.0 * value.imag(); }
};

// Free-space dyadic Green's function at omega_L without the contact term.
GreenTensor green_tensor(const Displacement& r);

PairCoupling pair_coupling(const Displacement& ri, const Displacement& rj,
                           const DipolePolarization& di, const DipolePolarization& dj,
                           double gamma_i, double gamma_j);

}  // namespace atomarray
