#include "atomarray/toy.hpp"

#include <cmath>
#include <random>

#include "atomarray/coupling.hpp"
#include "atomarray/markov.hpp"

namespace atomarray {

ToyCouplings toy_couplings(double a, double gamma_I, Configuration c, double gamma_L) {
    if (!(a > 0.0)) throw DomainError("toy spacing must be positive");
    if (!(gamma_I > 0.0)) throw DomainError("impurity linewidth must be positive");
    const Handedness hl = Handedness::right;
    const DipolePolarization dl = circular_dipole(hl);
    const DipolePolarization di = circular_dipole(c == Configuration::identical ? hl : opposite(hl));
    const Displacement o = Displacement::Zero();

    ToyCouplings tc;
    tc.a = a;
    tc.gamma_I = gamma_I;
    tc.gamma_L = gamma_L;
    tc.configuration = c;
    const PairCoupling c1 = pair_coupling(Displacement(a, 0, 0), o, dl, dl, gamma_L, gamma_L);
    const PairCoupling c2 = pair_coupling(Displacement(a, a, 0), o, dl, dl, gamma_L, gamma_L);
    const PairCoupling c3 = pair_coupling(Displacement(a / 2, a / 2, 0), o, dl, di, gamma_L, gamma_I);
    tc.J1 = c1.J();
    tc.Gamma1 = c1.Gamma();
    tc.J2 = c2.J();
    tc.Gamma2 = c2.Gamma();
    tc.Js = c3.J();
    tc.Gammas = c3.Gamma();
    return tc;
}

std::array<Eigen::Vector2d, 4> toy_positions(double a) {
    const double h = a / 2;
    return {Eigen::Vector2d(-h, -h), Eigen::Vector2d(h, -h), Eigen::Vector2d(h, h), Eigen::Vector2d(-h, h)};
}

Eigen::Matrix4cd toy_lattice_matrix(const ToyCouplings& tc) {
    const cplx I(0, 1);
    const cplx side = tc.J1 - I * tc.Gamma1 / 2.0;
    const cplx diag = tc.J2 - I * tc.Gamma2 / 2.0;
    Eigen::Matrix4cd m;
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) {
            const int s = (q - p + 4) % 4;
            m(p, q) = s == 0 ? -I * tc.gamma_L / 2.0 : (s == 2 ? diag : side);
        }
    return m;
}

Eigen::Matrix4d toy_lattice_modes() {
    const double h = 0.5, r = 1.0 / std::sqrt(2.0);
    Eigen::Matrix4d v;
    v.col(0) << h, h, h, h;
    v.col(1) << -h, h, -h, h;
    v.col(2) << 0, -r, 0, r;
    v.col(3) << -r, 0, r, 0;
    return v;
}

std::array<cplx, 4> toy_mode_eigenvalues(const ToyCouplings& tc) {
    const cplx I(0, 1);
    const cplx lpar = 2 * tc.J1 + tc.J2 - I / 2.0 * (tc.gamma_L + 2 * tc.Gamma1 + tc.Gamma2);
    const cplx lperp = -2 * tc.J1 + tc.J2 - I / 2.0 * (tc.gamma_L - 2 * tc.Gamma1 + tc.Gamma2);
    const cplx lm = -tc.J2 - I / 2.0 * (tc.gamma_L - tc.Gamma2);
    return {lpar, lperp, lm, lm};
}

namespace {

void pole_guard(double delta, double J, double Gamma) {
    if (std::abs(delta - J) < 1e-12 && std::abs(Gamma) < 1e-12)
        throw PoleError("toy mode pole", cplx(J, -Gamma / 2));
}

}  // namespace

cplx toy_self_energy_identical(const ToyCouplings& tc, double delta) {
    const cplx I(0, 1);
    const double Jt = tc.J_tilde(), Gt = tc.Gamma_tilde(), Jp = tc.J_par(), Gp = tc.Gamma_par();
    pole_guard(delta, Jp, Gp);
    return (Jt - I / 2.0 * Gt) * (Jt - I / 2.0 * Gt) / (delta - Jp + I / 2.0 * Gp);
}

cplx toy_self_energy_orthogonal(const ToyCouplings& tc, double delta) {
    const cplx I(0, 1);
    const double Jt = 2 * tc.Js, Gt = 2 * tc.Gammas, Jq = tc.J_perp(), Gq = tc.Gamma_perp();
    pole_guard(delta, Jq, Gq);
    return -(Jt - I / 2.0 * Gt) * (Jt - I / 2.0 * Gt) / (delta - Jq + I / 2.0 * Gq);
}

double toy_im_self_energy_identical(const ToyCouplings& tc, double delta) {
    const double Jt = tc.J_tilde(), Gt = tc.Gamma_tilde(), Jp = tc.J_par(), Gp = tc.Gamma_par();
    const double num = (Jt * Jt - Gt * Gt / 4) * (Gp / 2) + Jt * Gt * (delta - Jp);
    const double den = (delta - Jp) * (delta - Jp) + Gp * Gp / 4;
    return -(num / den);
}

cplx toy_rabi_identical(const ToyCouplings& tc, double delta, cplx omega_L, cplx omega_I) {
    const cplx I(0, 1);
    const cplx omega_par = 4.0 * omega_L / 2.0;
    const double Jt = tc.J_tilde(), Gt = tc.Gamma_tilde(), Jp = tc.J_par(), Gp = tc.Gamma_par();
    return (Jt + I / 2.0 * Gt) * omega_par / (delta - Jp - I / 2.0 * Gp) + omega_I;
}

cplx toy_rabi_orthogonal(const ToyCouplings& tc, double delta, cplx omega_perp) {
    const cplx I(0, 1);
    const double Jt = 2 * tc.Js, Gt = 2 * tc.Gammas, Jq = tc.J_perp(), Gq = tc.Gamma_perp();
    return -(Jt + I / 2.0 * Gt) * omega_perp / (delta - Jq - I / 2.0 * Gq);
}

double toy_dark_detuning(const ToyCouplings& tc) {
    if (tc.Gamma_tilde() == 0.0) throw DomainError("undefined dark detuning: vanishing impurity projection");
    return tc.J_par() - tc.J_tilde() * tc.Gamma_par() / tc.Gamma_tilde();
}

double toy_optimal_linewidth(const ToyCouplings& tc) {
    return tc.gamma_I - tc.Gamma_tilde() * tc.Gamma_tilde() / tc.Gamma_par();
}

double toy_optimal_shift(const ToyCouplings& tc) { return -tc.J_tilde() * tc.Gamma_tilde() / tc.Gamma_par(); }

SmallALimits toy_small_a_limits(const ToyCouplings& tc, double omega_I) {
    if (!(tc.a < 0.1)) throw ApproximationInvalid("small-spacing limit requires a < 0.1 lambda");
    const double G3 = tc.Gamma3();
    const double gl = tc.gamma_L;
    return {tc.gamma_I * (1 - 4 * G3 * G3 / (gl * (gl + 2 * tc.Gamma1 + tc.Gamma2))),
            omega_I * (1 - 4 * G3 / (gl + 2 * tc.Gamma1 + tc.Gamma2))};
}

DressedPair toy_dressed_states(const ToyCouplings& tc, double delta) {
    const cplx I(0, 1);
    const double Jt = tc.J_tilde(), Gt = tc.Gamma_tilde(), Jp = tc.J_par(), Gp = tc.Gamma_par();
    const cplx lattice_term = delta - Jp + I / 2.0 * Gp;
    if (!(10 * 0.5 * tc.gamma_I <= std::abs(lattice_term)))
        throw ApproximationInvalid("dressed-state expansion needs gamma_I/2 << |delta - J_par + i Gamma_par/2|");

    const cplx sigma = toy_self_energy_identical(tc, delta);
    const double gamma_eff = tc.gamma_I - 2 * sigma.imag();
    const double delta_eff = -sigma.real();
    const double alpha = Gt / Gp;

    DressedPair out;
    out.dark.eigenvalue = -delta_eff - I / 2.0 * gamma_eff;
    out.radiant.eigenvalue = -(delta - Jp + sigma.real()) - I / 2.0 * (Gp + 2 * sigma.imag());
    out.dark.amplitude << Jt - I / 2.0 * Gt, delta - Jp + I / 2.0 * Gp;
    out.radiant.amplitude << delta - Jp + I / 2.0 * Gp, -(Jt - I / 2.0 * Gt);
    out.dark.alpha = alpha;
    out.radiant.alpha = alpha;
    return out;
}

namespace {

SystemGeometry toy_system(double a, double gamma_I, Configuration c) {
    LatticeConfig lc;
    lc.spacing = a;
    lc.nx = lc.ny = 2;
    ImpuritySpec s;
    s.plaquette = {0, 0};
    s.gamma = gamma_I;
    s.configuration = c;
    return build_geometry(lc, {s});
}

OracleCheck compare(const std::string& q, double a, double delta, cplx got, cplx want, double tol,
                    double scale = 0.0) {
    const double ref = std::max(std::abs(want), scale);
    const double err = ref > 0 ? std::abs(got - want) / ref : std::abs(got - want);
    return {q, a, delta, got.real(), got.imag(), want.real(), want.imag(), err, tol, err <= tol};
}

}  // namespace

std::vector<OracleCheck> toy_check(const std::vector<double>& spacings, int n_delta, double gamma_I, unsigned seed) {
    constexpr double tol = 1e-10;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> offset(0.05, 30.0);
    std::vector<OracleCheck> out;
    const cplx omega_L = 0.01;
    const DriveSpec plane = DriveSpec::plane_wave(omega_L.real(), gamma_I);

    for (double a : spacings) {
        const ToyCouplings ti = toy_couplings(a, gamma_I, Configuration::identical);
        const ToyCouplings to = toy_couplings(a, gamma_I, Configuration::orthogonal);
        const SystemGeometry gi = toy_system(a, gamma_I, Configuration::identical);
        const SystemGeometry go = toy_system(a, gamma_I, Configuration::orthogonal);
        const CouplingMatrix m = assemble_lattice_matrix(gi);
        const ImpurityCouplingVector vi = impurity_vector(gi, 0);
        const ImpurityCouplingVector vo = impurity_vector(go, 0);

        const ModeData md = in_phase_mode_data(m, vi);
        const double dD = optimal_dark_detuning(md);
        out.push_back(compare("delta_dark", a, dD, dD, toy_dark_detuning(ti), tol));
        out.push_back(compare("alpha", a, dD, md.Gamma_tilde / md.Gamma, ti.Gamma_tilde() / ti.Gamma_par(), tol));

        const cplx s_dark = self_energy(m, vi, dD);
        const EffectiveParams p_dark = effective_params(s_dark, gamma_I);
        out.push_back(compare("gamma_eff_at_dark", a, dD, p_dark.gamma_eff, toy_optimal_linewidth(ti), tol));
        out.push_back(compare("omega_shift_at_dark", a, dD, p_dark.omega_shift, toy_optimal_shift(ti), tol));
        const cplx om_dark = effective_rabi(m, vi, dD, plane);
        out.push_back(compare("omega_eff_dark_state_drive", a, dD, om_dark,
                              plane.omega_I - 2.0 * omega_L * (ti.Gamma_tilde() / ti.Gamma_par()), tol));

        // Orthogonal drive profile along v_perp in row-major order.
        const Eigen::Matrix4d modes = toy_lattice_modes();
        Eigen::VectorXcd perp_profile(4);
        for (int t = 0; t < 4; ++t) perp_profile(kToyToRowMajor[t]) = omega_L * 2.0 * modes(t, 1);
        DriveSpec perp_drive;
        perp_drive.omega_L = omega_L;
        perp_drive.lattice_profile = perp_profile;
        const cplx omega_perp = 2.0 * omega_L;

        for (int n = 0; n < n_delta; ++n) {
            const double delta = ti.J_par() + offset(rng);
            const cplx s = self_energy(m, vi, delta);
            const cplx st = toy_self_energy_identical(ti, delta);
            out.push_back(compare("sigma_identical", a, delta, s, st, tol));
            out.push_back(compare("gamma_eff_identical", a, delta, ti.gamma_I - 2 * s.imag(),
                                  ti.gamma_I - 2 * toy_im_self_energy_identical(ti, delta), tol));
            out.push_back(compare("omega_eff_identical", a, delta, effective_rabi(m, vi, delta, plane),
                                  toy_rabi_identical(ti, delta, omega_L, plane.omega_I), tol));

            const cplx so = self_energy(m, vo, delta);
            out.push_back(compare("sigma_orthogonal", a, delta, so, toy_self_energy_orthogonal(to, delta), tol));
            out.push_back(compare("omega_eff_orthogonal_plane_wave", a, delta,
                                  effective_rabi(m, vo, delta, plane) - plane.omega_I,
                                  toy_rabi_orthogonal(to, delta, 0.0), tol, std::abs(omega_L)));
            out.push_back(compare("omega_eff_orthogonal_perp_drive", a, delta,
                                  effective_rabi(m, vo, delta, perp_drive) - perp_drive.omega_I,
                                  toy_rabi_orthogonal(to, delta, omega_perp), tol));

            const DressedPair dp = toy_dressed_states(ti, delta);
            const cplx I(0, 1);
            const double gamma_eff = gamma_I - 2 * s.imag();
            out.push_back(compare("lambda_dark", a, delta, s.real() - I / 2.0 * gamma_eff, dp.dark.eigenvalue, tol));
            out.push_back(compare("lambda_radiant", a, delta,
                                  -(delta - md.J + s.real()) - I / 2.0 * (md.Gamma + 2 * s.imag()),
                                  dp.radiant.eigenvalue, tol));
        }
    }
    return out;
}

}  // namespace atomarray
