#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"

#include "atomarray/coupling.hpp"
#include "atomarray/toy.hpp"

using namespace atomarray;
using std::numbers::pi;

namespace {

LatticeConfig square(int n, double a) {
    LatticeConfig l;
    l.nx = l.ny = n;
    l.spacing = a;
    return l;
}

SystemGeometry centered(int n, double a, Configuration c, double gamma = 0.01) {
    ImpuritySpec s;
    s.plaquette = central_plaquette(square(n, a));
    s.configuration = c;
    s.gamma = gamma;
    return build_geometry(square(n, a), {s});
}

// Toy-ordered vector from a row-major 2x2 vector.
Eigen::Vector4cd toy_order(const Eigen::VectorXcd& v) {
    Eigen::Vector4cd out;
    for (int t = 0; t < 4; ++t) out(t) = v(kToyToRowMajor[t]);
    return out;
}

}  // namespace

TEST_CASE("lattice matrix structure") {
    const SystemGeometry g = centered(5, 0.17, Configuration::identical);
    const CouplingMatrix m = assemble_lattice_matrix(g);
    CHECK(m.size() == 25);
    CHECK((m.matrix - m.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    for (int p = 0; p < 25; ++p) CHECK(m.matrix(p, p) == cplx(0, -0.5));
    const ModalDecomposition md = ModalDecomposition::of(m.matrix);
    CHECK(md.eigenvalues.imag().maxCoeff() <= 1e-8);
}

TEST_CASE("two-atom lattice") {
    LatticeConfig l;
    l.nx = 2;
    l.ny = 2;
    l.spacing = 0.3;
    const SystemGeometry g = build_geometry(l, {});
    const CouplingMatrix m = assemble_lattice_matrix(g);
    const auto d = circular_dipole(Handedness::right);
    const cplx c = pair_coupling(Displacement(0.3, 0, 0), Displacement::Zero(), d, d, 1, 1).value;
    CHECK(std::abs(m.matrix(0, 1) - c) < 1e-15);
    CHECK(std::abs(m.matrix(0, 2) - c) < 1e-15);
}

TEST_CASE("2x2 eigenmodes match the plaquette modes") {
    for (double a : {0.05, 0.1, 0.2, 0.3}) {
        const ToyCouplings tc = toy_couplings(a, 0.01);
        const Eigen::Matrix4cd mt = toy_lattice_matrix(tc);
        const SystemGeometry g = centered(2, a, Configuration::identical);
        const CouplingMatrix m = assemble_lattice_matrix(g);
        // Row-major matrix permuted into toy order equals the toy matrix.
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q)
                CHECK(std::abs(m.matrix(kToyToRowMajor[p], kToyToRowMajor[q]) - mt(p, q)) < 1e-12 * std::abs(mt(p, q)) + 1e-15);
        const Eigen::Matrix4d modes = toy_lattice_modes();
        const auto lam = toy_mode_eigenvalues(tc);
        for (int k = 0; k < 4; ++k) {
            const Eigen::Vector4cd v = modes.col(k).cast<cplx>();
            const Eigen::Vector4cd r = mt * v - lam[k] * v;
            CHECK(r.cwiseAbs().maxCoeff() < 1e-10 * std::abs(lam[k]));
        }
        // Numeric eigenvalues, sorted, against the closed forms.
        Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(mt);
        std::vector<cplx> num(es.eigenvalues().data(), es.eigenvalues().data() + 4);
        std::vector<cplx> ana(lam.begin(), lam.end());
        auto by = [](cplx x, cplx y) { return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag()); };
        std::sort(num.begin(), num.end(), by);
        std::sort(ana.begin(), ana.end(), by);
        for (int k = 0; k < 4; ++k) CHECK(std::abs(num[k] - ana[k]) < 1e-10 * std::max(1.0, std::abs(ana[k])));
        // Mode-sum identity of the dissipative parts.
        CHECK(tc.Gamma_par() + tc.Gamma_perp() + 2 * (tc.gamma_L - tc.Gamma2) == doctest::Approx(4 * tc.gamma_L));
    }
}

TEST_CASE("selection rules of the centered impurity") {
    const Eigen::Matrix4d modes = toy_lattice_modes();
    for (double a : {0.05, 0.1, 0.2, 0.3}) {
        const Eigen::Vector4cd gi = toy_order(impurity_vector(centered(2, a, Configuration::identical), 0).to_lattice);
        const Eigen::Vector4cd go = toy_order(impurity_vector(centered(2, a, Configuration::orthogonal), 0).to_lattice);
        for (int p = 1; p < 4; ++p) CHECK(std::abs(gi(p) - gi(0)) < 1e-15);
        CHECK(std::abs(gi.dot(modes.col(1).cast<cplx>())) < 1e-12);
        CHECK(std::abs(gi.dot(modes.col(2).cast<cplx>())) < 1e-12);
        CHECK(std::abs(gi.dot(modes.col(3).cast<cplx>())) < 1e-12);
        CHECK(std::abs(go.dot(modes.col(0).cast<cplx>())) < 1e-12);
        // Checkerboard sign pattern.
        CHECK(std::abs(go(0) + go(1)) < 1e-15);
        CHECK(std::abs(go(0) - go(2)) < 1e-15);
        CHECK(std::abs(go(1) - go(3)) < 1e-15);
    }
}

TEST_CASE("impurity vector structure") {
    const SystemGeometry gi = centered(6, 0.2, Configuration::identical);
    const ImpurityCouplingVector v = impurity_vector(gi, 0);
    CHECK((v.to_lattice - v.from_lattice).cwiseAbs().maxCoeff() < 1e-15);
    // Quarter-turn about the impurity maps atom (i,j) to (5-j, i) on the 6x6 grid.
    for (int j = 0; j < 6; ++j)
        for (int i = 0; i < 6; ++i)
            CHECK(std::abs(v.to_lattice(j * 6 + i) - v.to_lattice(i * 6 + (5 - j))) < 1e-14);

    const ImpurityCouplingVector vo = impurity_vector(centered(6, 0.2, Configuration::orthogonal), 0);
    // On the plaquette diagonals the reverse element is the negative.
    for (int i = 0; i < 6; ++i) CHECK(std::abs(vo.to_lattice(i * 6 + i) + vo.from_lattice(i * 6 + i)) < 1e-14);

    const ImpurityCouplingVector v4 = impurity_vector(centered(6, 0.2, Configuration::identical, 0.04), 0);
    CHECK((v4.to_lattice - 2.0 * v.to_lattice).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(impurity_vector(gi, 1), DomainError);
}

TEST_CASE("band structure fixtures for a = 0.2") {
    const LatticeConfig l = square(2, 0.2);
    const LatticeSum sum(l, 40);
    const cplx k0 = sum(Eigen::Vector2d::Zero());
    // Independent vectorized evaluation of the 41x41 patch sum.
    CHECK(k0.real() == doctest::Approx(-0.5081361462038092).epsilon(1e-10));
    CHECK(-2 * k0.imag() == doctest::Approx(5.860619439874549).epsilon(1e-10));
    CHECK(-2 * k0.imag() > 5.0);
    const cplx corner = sum(Eigen::Vector2d(pi / 0.2, pi / 0.2));
    CHECK(corner.real() == doctest::Approx(1.0911467948917433).epsilon(1e-10));
    CHECK(-2 * corner.imag() == doctest::Approx(-0.02429452483550998).epsilon(1e-8));
    CHECK(std::abs(-2 * corner.imag()) < 0.05);
}

TEST_CASE("band structure symmetry and passivity") {
    const LatticeConfig l = square(2, 0.2);
    const auto grid = bz_grid(0.2, 21);
    const BandStructure b = band_structure(l, grid, 20);
    const int n = 21;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto& p = b.points[i * n + j];
            const auto& q = b.points[(n - 1 - i) * n + (n - 1 - j)];
            CHECK(p.J == doctest::Approx(q.J).epsilon(1e-10));
            CHECK(std::abs(p.Gamma - q.Gamma) < 1e-10);
            CHECK(p.in_light_cone == (std::hypot(p.kx, p.ky) <= 2 * pi));
        }
    // Fejer-weighted sums are non-negative up to rounding.
    const BandStructure bf = band_structure(LatticeSum(l, 40, PatchWindow::fejer), bz_grid(0.2, 41));
    double worst = 0;
    for (const auto& p : bf.points) worst = std::min(worst, p.Gamma);
    CHECK(worst > -1e-8);
    CHECK_THROWS_AS(band_structure(l, {Eigen::Vector2d(16.0, 0.0)}, 10), DomainError);
}

TEST_CASE("two-site patch reduces to symmetric and antisymmetric pairs") {
    const LatticeConfig l = square(2, 0.25);
    const LatticeSum s(l, std::vector<Eigen::Vector2d>{Eigen::Vector2d(0.25, 0)});
    LatticeConfig line = l;
    const SystemGeometry g = build_geometry(line, {});
    const cplx c = assemble_lattice_matrix(g).matrix(0, 1);
    CHECK(std::abs(s(Eigen::Vector2d::Zero()) - (cplx(0, -0.5) + c)) < 1e-15);
    CHECK(std::abs(s(Eigen::Vector2d(pi / 0.25, 0)) - (cplx(0, -0.5) - c)) < 1e-14);
}

TEST_CASE("band edge") {
    const BandEdge e2 = band_edge(square(2, 0.2), 101, 40);
    const BandEdge e1 = band_edge(square(2, 0.1), 101, 40);
    CHECK(e1.value > e2.value);
    // Maximum sits next to the zone corner, well outside the light cone.
    CHECK(std::abs(e2.k.x()) > 0.9 * pi / 0.2);
    CHECK(std::abs(e2.k.y()) > 0.9 * pi / 0.2);
    // Independent patch sum at (-pi/a, -0.96 pi/a).
    CHECK(e2.value == doctest::Approx(1.0952966362752992).epsilon(1e-10));
    for (double a : {0.1, 0.2}) {
        const BandEdge coarse = band_edge(square(2, a), 101, 40);
        const BandEdge fine = band_edge(square(2, a), 201, 40);
        CHECK(std::abs(fine.value / coarse.value - 1) < 0.005);
    }
}

TEST_CASE("modal decomposition reconstructs the matrix") {
    const CouplingMatrix m = assemble_lattice_matrix(centered(2, 0.2, Configuration::identical));
    const ModalDecomposition md = ModalDecomposition::of(m.matrix);
    const Eigen::MatrixXcd rebuilt = md.right * md.eigenvalues.asDiagonal() * md.left;
    CHECK((rebuilt - m.matrix).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(md.inverse_residual < 1e-12);
}
