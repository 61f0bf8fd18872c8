#include <cmath>

#include "doctest.h"

#include "atomarray/dynamics.hpp"
#include "atomarray/two_impurity.hpp"

using namespace atomarray;

namespace {

LatticeConfig square(int n, double a) {
    LatticeConfig l;
    l.nx = l.ny = n;
    l.spacing = a;
    return l;
}

SystemGeometry pair_geometry(int n, double a, int m, Configuration c, double gamma = 0.01) {
    const LatticeConfig l = square(n, a);
    const auto p = symmetric_pair(l, m);
    ImpuritySpec s1, s2;
    s1.plaquette = p[0];
    s2.plaquette = p[1];
    s1.configuration = s2.configuration = c;
    s1.gamma = s2.gamma = gamma;
    return build_geometry(l, {s1, s2});
}

}  // namespace

TEST_CASE("free-space impurity coupling") {
    const SystemGeometry g = pair_geometry(6, 0.2, 2, Configuration::identical);
    const auto& p = g.impurities;
    const cplx direct = pair_coupling(p[0].position, p[1].position, p[0].dipole(), p[1].dipole(), 0.01, 0.01).value;
    CHECK(free_space_phi(g, 0, 1) == direct);
    CHECK(std::abs(free_space_phi(g, 0, 1) - free_space_phi(g, 1, 0)) < 1e-15);
    // Scalar form at d = 0.4 for two right-circular dipoles: the in-plane
    // projection of the Green tensor is (A - B/2) e^{ikr}/(4 pi r).
    const double d = 0.4, k = 2 * M_PI, kr = k * d;
    const cplx I(0, 1);
    const cplx A = 1.0 + I / kr - 1.0 / (kr * kr);
    const cplx B = 1.0 + 3.0 * I / kr - 3.0 / (kr * kr);
    const cplx ref = -(3 * M_PI * 0.01 / k) * std::exp(I * kr) / (4 * M_PI * d) * (A - B / 2.0);
    CHECK(std::abs(free_space_phi(g, 0, 1) - ref) < 1e-14);
    CHECK_THROWS_AS(free_space_phi(g, 0, 2), DomainError);

    // Near-field 1/d^3 law.
    const double a = 0.001;
    const double base = std::abs(free_space_phi(pair_geometry(12, a, 1, Configuration::identical), 0, 1).real());
    for (int m : {2, 4, 8}) {
        const double v = std::abs(free_space_phi(pair_geometry(12, a, m, Configuration::identical), 0, 1).real());
        CHECK(v * m * m * m / base == doctest::Approx(1).epsilon(0.01));
    }
}

TEST_CASE("decoupled lattice leaves the free-space value") {
    const SystemGeometry g = pair_geometry(4, 0.2, 1, Configuration::identical);
    const CouplingMatrix m = assemble_lattice_matrix(g);
    ImpurityCouplingVector zero{Eigen::VectorXcd::Zero(16), Eigen::VectorXcd::Zero(16)};
    const cplx phi = free_space_phi(g, 0, 1);
    CHECK(effective_interaction(m, zero, zero, 3.0, phi) == phi);
    CHECK(q2(phi, 0.01) == doctest::Approx(phi.real() / 0.01));
    CHECK(q2(0.0, 0.01) == 0.0);
    CHECK_THROWS_AS(q2(1.0, 0.0), UnphysicalError);
    CHECK_THROWS_AS(q2(1.0, -1e-3), UnphysicalError);
}

TEST_CASE("symmetric placement") {
    for (Configuration c : {Configuration::identical, Configuration::orthogonal}) {
        const SystemGeometry g = pair_geometry(8, 0.15, 2, c);
        const CouplingMatrix m = assemble_lattice_matrix(g);
        const ImpurityCouplingVector v1 = impurity_vector(g, 0), v2 = impurity_vector(g, 1);
        const double delta = 6.0;
        const TwoImpurityResult r = two_impurity(g, delta);
        CHECK(std::abs(r.gamma_eff_1 - r.gamma_eff_2) < 1e-10);
        const cplx phi = free_space_phi(g, 0, 1);
        const cplx e12 = effective_interaction(m, v1, v2, delta, phi);
        const cplx e21 = effective_interaction(m, v2, v1, delta, phi);
        CHECK(std::abs(e12 - e21) < 1e-10 * std::abs(e12));
        CHECK(r.phi_eff == e12);
        CHECK(r.d == doctest::Approx(0.3));
        CHECK(r.q2_free == doctest::Approx(phi.real() / 0.01));
    }
}

TEST_CASE("adiabatic elimination of the lattice") {
    for (Configuration c : {Configuration::identical, Configuration::orthogonal}) {
        const SystemGeometry g = pair_geometry(4, 0.2, 1, c);
        for (double delta : {2.0, 5.0}) {
            const FullHamiltonian h = build_full_hamiltonian(g, delta);
            const Eigen::Index n = static_cast<Eigen::Index>(h.n_lattice);
            const Eigen::MatrixXcd hll = h.matrix.topLeftCorner(n, n);
            const Eigen::MatrixXcd hli = h.matrix.topRightCorner(n, 2);
            const Eigen::MatrixXcd hil = h.matrix.bottomLeftCorner(2, n);
            const Eigen::Matrix2cd heff = h.matrix.bottomRightCorner(2, 2) - hil * hll.partialPivLu().solve(hli);
            const TwoImpurityResult r = two_impurity(g, delta);
            CHECK(-2 * heff(0, 0).imag() == doctest::Approx(r.gamma_eff_1).epsilon(1e-8));
            CHECK(-2 * heff(1, 1).imag() == doctest::Approx(r.gamma_eff_2).epsilon(1e-8));
            // Same exchange strength; the reported form conjugates the lattice part.
            CHECK(heff(0, 1).real() == doctest::Approx(r.phi_eff.real()).epsilon(1e-8));
            CHECK(std::abs(std::conj(heff(0, 1) - r.phi) + r.phi - r.phi_eff) < 1e-8 * std::abs(r.phi_eff));
        }
    }
}

TEST_CASE("lattice and free-space exchange cancel along a detuning scan") {
    const SystemGeometry g = pair_geometry(10, 0.1, 1, Configuration::identical);
    const CouplingMatrix m = assemble_lattice_matrix(g);
    const Resolvent above(m, 30.0), below(m, 20.0);
    CHECK(two_impurity(g, below).phi_eff.real() > 0);
    CHECK(two_impurity(g, above).phi_eff.real() < 0);
}

TEST_CASE("quality factors at the default operating points") {
    const double gI = 0.01;
    const double di = resolve_detuning(OperatingPoint::default_for(Configuration::identical), square(10, 0.1),
                                       Configuration::identical, gI);
    const double dorth = resolve_detuning(OperatingPoint::default_for(Configuration::orthogonal), square(10, 0.1),
                                          Configuration::orthogonal, gI);
    const TwoImpurityResult ri = two_impurity(pair_geometry(10, 0.1, 1, Configuration::identical), di);
    const TwoImpurityResult ro = two_impurity(pair_geometry(10, 0.1, 1, Configuration::orthogonal), dorth);
    CHECK(ri.q2 >= 1e4);
    CHECK(std::abs(ri.q2) > std::abs(ro.q2));

    const double di2 = resolve_detuning(OperatingPoint::default_for(Configuration::identical), square(20, 0.2),
                                        Configuration::identical, gI);
    const double do2 = resolve_detuning(OperatingPoint::default_for(Configuration::orthogonal), square(20, 0.2),
                                        Configuration::orthogonal, gI);
    const TwoImpurityResult fi = two_impurity(pair_geometry(20, 0.2, 10, Configuration::identical), di2);
    const TwoImpurityResult fo = two_impurity(pair_geometry(20, 0.2, 10, Configuration::orthogonal), do2);
    CHECK(std::abs(fo.q2) > std::abs(fi.q2));
}

TEST_CASE("operating points") {
    using K = OperatingPoint::Kind;
    CHECK(OperatingPoint::default_for(Configuration::identical).kind == K::dark);
    const OperatingPoint o = OperatingPoint::default_for(Configuration::orthogonal);
    CHECK(o.kind == K::band_edge_multiple);
    CHECK(o.value == 1.05);
    for (K k : {K::absolute, K::band_edge_multiple, K::dark, K::dark_band, K::dark_in_phase})
        CHECK(parse_operating_kind(to_string(k)) == k);
    CHECK_THROWS(parse_operating_kind("bright"));
    const LatticeConfig l = square(6, 0.2);
    CHECK(resolve_detuning({K::absolute, 3.5}, l, Configuration::identical, 0.01) == 3.5);
    CHECK(resolve_detuning(o, l, Configuration::orthogonal, 0.01) ==
          doctest::Approx(1.05 * band_edge(l, 101, 40).value));
    // The numerical optimum sits above the top lattice mode.
    const ModalDecomposition md = ModalDecomposition::of(assemble_lattice_matrix(build_geometry(l, {})).matrix);
    CHECK(resolve_detuning({K::dark, 0}, l, Configuration::identical, 0.01) > md.eigenvalues.real().maxCoeff());
    CHECK(std::isfinite(resolve_detuning({K::dark_in_phase, 0}, l, Configuration::identical, 0.01)));
    CHECK(std::isfinite(resolve_detuning({K::dark_band, 0}, l, Configuration::identical, 0.01)));
}

TEST_CASE("distance scan") {
    const LatticeConfig l = square(20, 0.2);
    const double delta = resolve_detuning({OperatingPoint::Kind::dark, 0}, l, Configuration::identical, 0.01);
    std::vector<int> ms;
    for (int m = 1; m <= 12; ++m) ms.push_back(m);
    const DistanceScan s = distance_scan(l, Configuration::identical, 0.01, delta, ms, 2);
    CHECK(s.rows.size() == 12);
    CHECK(s.region_end >= 4);
    CHECK(s.region_end <= 6);
    REQUIRE(s.fit.has_value());
    CHECK(s.fit->slope < 0);
    REQUIRE(s.fit->decay_length.has_value());
    CHECK(*s.fit->decay_length > 0);
    // Each row matches a direct evaluation.
    const TwoImpurityResult direct = two_impurity(pair_geometry(20, 0.2, 3, Configuration::identical), delta);
    CHECK(s.rows[2].q2 == doctest::Approx(direct.q2).epsilon(1e-12));
    // Serial and threaded runs agree exactly.
    const DistanceScan s1 = distance_scan(l, Configuration::identical, 0.01, delta, ms, 1);
    for (std::size_t i = 0; i < ms.size(); ++i) CHECK(s1.rows[i].q2 == s.rows[i].q2);
}

TEST_CASE("spacing scan needs enough points") {
    const SpacingScan s = spacing_scan({0.1}, 6, 6, 0.01, OperatingPoint::default_for(Configuration::identical),
                                       OperatingPoint::default_for(Configuration::orthogonal));
    CHECK(s.rows.size() == 1);
    CHECK_FALSE(s.identical.has_value());
    CHECK_FALSE(s.fit_error.empty());
}

TEST_CASE("reach fixtures on a 10x10 array") {
    // Regression values from the pipeline at the default operating points.
    const std::vector<double> as{0.1, 0.2, 0.3};
    const auto ri = reach_scan(as, 10, 10, Configuration::identical, 0.01,
                               OperatingPoint::default_for(Configuration::identical), 1.0, 2);
    const auto ro = reach_scan(as, 10, 10, Configuration::orthogonal, 0.01,
                               OperatingPoint::default_for(Configuration::orthogonal), 1.0, 2);
    const int want_i[] = {5, 4, 3}, want_o[] = {8, 6, 1};
    for (int k = 0; k < 3; ++k) {
        CHECK(ri[k].reach == want_i[k]);
        CHECK(ro[k].reach == want_o[k]);
    }
    CHECK(ri[0].q2_max == doctest::Approx(85895.240092999258).epsilon(1e-6));
    CHECK(ro[0].q2_max == doctest::Approx(530.33370623759788).epsilon(1e-6));
    CHECK(ri[0].reach >= ri[1].reach);
    CHECK(ro[0].reach >= ro[1].reach);
    const auto none = reach_scan({0.2}, 10, 10, Configuration::identical, 0.01,
                                 OperatingPoint::default_for(Configuration::identical), 1e9);
    CHECK(none[0].reach == 0);
}
