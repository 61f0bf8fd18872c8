#include "atomarray/markov.hpp"

#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

namespace atomarray {

DriveSpec DriveSpec::plane_wave(double omega_L, double gamma_I, double gamma_L) {
    DriveSpec d;
    d.omega_L = omega_L;
    d.omega_I = omega_L * std::sqrt(gamma_I / gamma_L);
    return d;
}

Eigen::VectorXcd DriveSpec::lattice_vector(std::size_t n) const {
    if (lattice_profile) {
        if (static_cast<std::size_t>(lattice_profile->size()) != n)
            throw DomainError("drive profile length does not match the lattice");
        return *lattice_profile;
    }
    return Eigen::VectorXcd::Constant(static_cast<Eigen::Index>(n), omega_L);
}

Resolvent::Resolvent(const CouplingMatrix& m, double delta, const ModalDecomposition* spectrum) : delta_(delta) {
    if (spectrum) {
        const cplx near = spectrum->nearest_eigenvalue(delta);
        if (std::abs(near - delta) < 1e-6 && std::abs(near.imag()) < 1e-6)
            throw PoleError("detuning sits on an undamped lattice mode", near);
    }
    const Eigen::Index n = m.matrix.rows();
    lu_.compute(delta * Eigen::MatrixXcd::Identity(n, n) - m.matrix);
    if (!(lu_.rcond() > 1e-14)) {
        const ModalDecomposition md = ModalDecomposition::of(m.matrix);
        throw PoleError("singular resolvent", md.nearest_eigenvalue(delta));
    }
}

cplx self_energy(const Resolvent& r, const ImpurityCouplingVector& g) {
    return g.from_lattice.transpose() * r.solve(g.to_lattice);
}

cplx self_energy(const CouplingMatrix& m, const ImpurityCouplingVector& g, double delta) {
    return self_energy(Resolvent(m, delta), g);
}

Eigen::VectorXcd modal_weights(const ModalDecomposition& md, const ImpurityCouplingVector& g) {
    const Eigen::VectorXcd hv = md.right.transpose() * g.from_lattice;
    const Eigen::VectorXcd vg = md.left * g.to_lattice;
    return hv.cwiseProduct(vg);
}

cplx self_energy_modal(const ModalDecomposition& md, const ImpurityCouplingVector& g, double delta) {
    const Eigen::VectorXcd w = modal_weights(md, g);
    cplx s(0.0);
    for (Eigen::Index n = 0; n < w.size(); ++n) {
        const cplx den = delta - md.eigenvalues(n);
        if (std::abs(den) < 1e-6 && std::abs(md.eigenvalues(n).imag()) < 1e-6)
            throw PoleError("detuning sits on an undamped lattice mode", md.eigenvalues(n));
        s += w(n) / den;
    }
    return s;
}

EffectiveParams effective_params(cplx sigma, double gamma_I, cplx omega_eff) {
    EffectiveParams p;
    p.sigma = sigma;
    p.gamma_eff = gamma_I - 2.0 * sigma.imag();
    p.omega_shift = sigma.real();
    p.omega_eff = omega_eff;
    if (p.gamma_eff < -1e-8) throw UnphysicalError("negative effective linewidth");
    p.q1 = p.gamma_eff > 0 ? std::abs(omega_eff) / p.gamma_eff : std::numeric_limits<double>::infinity();
    return p;
}

cplx effective_rabi(const Resolvent& r, const ImpurityCouplingVector& g, const DriveSpec& drive) {
    // The mode projections are built from g (impurity into lattice), so the
    // conjugated numerator is conj(g):
    // conj(g)^T (delta - conj M)^-1 Omega = conj( g^T (delta - M)^-1 conj Omega )
    const Eigen::VectorXcd om = drive.lattice_vector(static_cast<std::size_t>(g.to_lattice.size()));
    const cplx t = g.to_lattice.transpose() * r.solve(om.conjugate());
    return std::conj(t) + drive.omega_I;
}

cplx effective_rabi(const CouplingMatrix& m, const ImpurityCouplingVector& g, double delta, const DriveSpec& drive) {
    return effective_rabi(Resolvent(m, delta), g, drive);
}

double optimal_dark_detuning(const ModeData& m) {
    if (std::abs(m.Gamma_tilde) < 1e-14) throw DomainError("undefined dark detuning: vanishing impurity projection");
    return m.J - m.J_tilde * m.Gamma / m.Gamma_tilde;
}

ModeData band_mode_data(const LatticeSum& band, const SystemGeometry& g, const ImpurityCouplingVector& v,
                        std::size_t k_imp, const Eigen::Vector2d& k) {
    if (k_imp >= g.impurities.size()) throw DomainError("impurity index out of range");
    const cplx lat = band(k);
    const Displacement& rs = g.impurities[k_imp].position;
    cplx proj(0.0);
    for (std::size_t p = 0; p < g.lattice_size(); ++p) {
        const Displacement d = g.lattice_positions[p] - rs;
        proj += v.to_lattice(p) * std::polar(1.0, -(k.x() * d.x() + k.y() * d.y()));
    }
    proj /= std::sqrt(static_cast<double>(g.lattice_size()));
    return {lat.real(), -2.0 * lat.imag(), proj.real(), -2.0 * proj.imag()};
}

ModeData in_phase_mode_data(const CouplingMatrix& m, const ImpurityCouplingVector& v) {
    const Eigen::Index n = m.matrix.rows();
    const Eigen::VectorXcd u = Eigen::VectorXcd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    const cplx lat = u.transpose() * m.matrix * u;
    const cplx proj = u.transpose() * v.to_lattice;
    return {lat.real(), -2.0 * lat.imag(), proj.real(), -2.0 * proj.imag()};
}

namespace {

double gamma_eff_modal(const Eigen::VectorXcd& w, const Eigen::VectorXcd& lam, double gamma_I, double delta) {
    cplx s(0.0);
    for (Eigen::Index n = 0; n < w.size(); ++n) s += w(n) / (delta - lam(n));
    return gamma_I - 2.0 * s.imag();
}

}  // namespace

double minimize_linewidth(const ModalDecomposition& md, const ImpurityCouplingVector& g, double gamma_I) {
    const Eigen::VectorXcd w = modal_weights(md, g);
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index n = 0; n < md.eigenvalues.size(); ++n) top = std::max(top, md.eigenvalues(n).real());

    // Log-spaced offsets above the top mode resolve both the near-band
    // structure and the slow large-detuning tail.
    const double scale = 1.0 + std::abs(top);
    const int n_scan = 4000;
    const double lo = std::log(1e-4), hi = std::log(1e3 * scale);
    std::vector<double> xs(n_scan), fs(n_scan);
    int best = 0;
    for (int i = 0; i < n_scan; ++i) {
        xs[i] = top + std::exp(lo + (hi - lo) * i / (n_scan - 1));
        fs[i] = gamma_eff_modal(w, md.eigenvalues, gamma_I, xs[i]);
        if (fs[i] < fs[best]) best = i;
    }
    const double a = xs[std::max(best - 1, 0)];
    const double b = xs[std::min(best + 1, n_scan - 1)];
    auto f = [&](double d) { return gamma_eff_modal(w, md.eigenvalues, gamma_I, d); };
    const auto r = boost::math::tools::brent_find_minima(f, a, b, std::numeric_limits<double>::digits / 2);
    return r.second <= fs[best] ? r.first : xs[best];
}

namespace {

bool varies(cplx s0, cplx sm, cplx sp) {
    const double ref = std::abs(s0);
    if (ref == 0.0) return std::abs(sm) > 0.0 || std::abs(sp) > 0.0;
    return std::max(std::abs(sm - s0), std::abs(sp - s0)) > 0.2 * ref;
}

}  // namespace

bool markov_warning(const CouplingMatrix& m, const ImpurityCouplingVector& g, double delta, cplx sigma,
                    double gamma_eff) {
    const double w = std::abs(gamma_eff);
    try {
        return varies(sigma, self_energy(m, g, delta - w), self_energy(m, g, delta + w));
    } catch (const PoleError&) {
        return true;
    }
}

bool markov_warning_modal(const ModalDecomposition& md, const ImpurityCouplingVector& g, double delta, cplx sigma,
                          double gamma_eff) {
    const double w = std::abs(gamma_eff);
    try {
        return varies(sigma, self_energy_modal(md, g, delta - w), self_energy_modal(md, g, delta + w));
    } catch (const PoleError&) {
        return true;
    }
}

}  // namespace atomarray
