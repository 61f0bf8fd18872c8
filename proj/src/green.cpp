#include "atomarray/green.hpp"

#include <cmath>

namespace atomarray {

Handedness opposite(Handedness h) {
    return h == Handedness::right ? Handedness::left : Handedness::right;
}

const char* to_string(Handedness h) { return h == Handedness::right ? "right" : "left"; }

DipolePolarization::DipolePolarization(const Eigen::Vector3cd& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("dipole vector must be nonzero and finite");
    d_ = v / n;
}

DipolePolarization DipolePolarization::circular(Handedness h) {
    const double s = h == Handedness::right ? 1.0 : -1.0;
    return DipolePolarization(Eigen::Vector3cd(cplx(1.0, 0.0), cplx(0.0, s), cplx(0.0, 0.0)));
}

DipolePolarization circular_dipole(Handedness h) { return DipolePolarization::circular(h); }

GreenTensor green_tensor(const Displacement& r) {
    if (!r.allFinite()) throw DomainError("displacement must be finite");
    const double rn = r.norm();
    if (rn == 0.0) throw DomainError("zero displacement: self-term excluded");

    const double kr = kOmegaL * rn;
    const cplx i(0.0, 1.0);
    const cplx pref = std::exp(i * kr) / (4.0 * std::numbers::pi * rn);
    const cplx A = 1.0 + i / kr - 1.0 / (kr * kr);
    const cplx B = 1.0 + 3.0 * i / kr - 3.0 / (kr * kr);
    const Eigen::Vector3d u = r / rn;

    GreenTensor G;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            G(a, b) = pref * ((a == b ? A : cplx(0.0)) - B * u(a) * u(b));
    return G;
}

PairCoupling pair_coupling(const Displacement& ri, const Displacement& rj,
                           const DipolePolarization& di, const DipolePolarization& dj,
                           double gamma_i, double gamma_j) {
    if (!(gamma_i >= 0.0) || !(gamma_j >= 0.0)) throw DomainError("linewidths must be non-negative");
    if (ri == rj) throw DomainError("coincident positions");
    const GreenTensor G = green_tensor(ri - rj);
    const cplx dGd = di.vector().dot(G * dj.vector());
    return {-(3.0 * std::numbers::pi * std::sqrt(gamma_i * gamma_j) / kOmegaL) * dGd};
}

}  // namespace atomarray
