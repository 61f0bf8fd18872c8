#include "atomarray/coupling.hpp"

#include <cmath>
#include <numbers>

namespace atomarray {

CouplingMatrix assemble_lattice_matrix(const SystemGeometry& g) {
    const std::size_t n = g.lattice_size();
    if (n < 2) throw DomainError("lattice matrix needs at least 2 atoms");
    const DipolePolarization d = g.lattice.dipole();
    const double gl = g.lattice.gamma_L;
    CouplingMatrix m{Eigen::MatrixXcd(n, n)};
    for (std::size_t p = 0; p < n; ++p) {
        m.matrix(p, p) = cplx(0.0, -0.5 * gl);
        for (std::size_t q = p + 1; q < n; ++q) {
            const cplx c = pair_coupling(g.lattice_positions[p], g.lattice_positions[q], d, d, gl, gl).value;
            m.matrix(p, q) = c;
            m.matrix(q, p) = c;
        }
    }
    return m;
}

ImpurityCouplingVector impurity_vector(const SystemGeometry& g, std::size_t k) {
    if (k >= g.impurities.size()) throw DomainError("impurity index out of range");
    const PlacedImpurity& imp = g.impurities[k];
    const DipolePolarization dl = g.lattice.dipole();
    const DipolePolarization di = imp.dipole();
    const double gl = g.lattice.gamma_L, gi = imp.spec.gamma;
    const std::size_t n = g.lattice_size();
    ImpurityCouplingVector v{Eigen::VectorXcd(n), Eigen::VectorXcd(n)};
    for (std::size_t p = 0; p < n; ++p) {
        const Displacement& rp = g.lattice_positions[p];
        v.to_lattice(p) = pair_coupling(rp, imp.position, dl, di, gl, gi).value;
        v.from_lattice(p) = pair_coupling(imp.position, rp, di, dl, gi, gl).value;
    }
    return v;
}

ModalDecomposition ModalDecomposition::of(const Eigen::MatrixXcd& m) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, true);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    ModalDecomposition md;
    md.eigenvalues = es.eigenvalues();
    md.right = es.eigenvectors();
    for (Eigen::Index c = 0; c < md.right.cols(); ++c) {
        const cplx vv = (md.right.col(c).transpose() * md.right.col(c))(0, 0);
        if (std::abs(vv) > 1e-8) md.right.col(c) /= std::sqrt(vv);
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(md.right);
    md.left = lu.inverse();
    const Eigen::Index n = m.rows();
    md.inverse_residual = (md.left * md.right - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    return md;
}

cplx ModalDecomposition::nearest_eigenvalue(cplx z) const {
    cplx best = eigenvalues.size() ? eigenvalues(0) : cplx(0.0);
    for (Eigen::Index i = 1; i < eigenvalues.size(); ++i)
        if (std::abs(eigenvalues(i) - z) < std::abs(best - z)) best = eigenvalues(i);
    return best;
}

LatticeSum::LatticeSum(const LatticeConfig& config, int patch, PatchWindow window)
    : a_(config.spacing), gamma_L_(config.gamma_L) {
    config.validate();
    if (patch < 1) throw DomainError("patch size must be positive");
    const int h = patch / 2;
    half_ = h;
    const DipolePolarization d = config.dipole();
    const Displacement o = Displacement::Zero();
    for (int m = -h; m <= h; ++m)
        for (int n = -h; n <= h; ++n) {
            if (m == 0 && n == 0) continue;
            const double w = window == PatchWindow::fejer
                                 ? (1.0 - std::abs(m) / (h + 1.0)) * (1.0 - std::abs(n) / (h + 1.0))
                                 : 1.0;
            r_.emplace_back(m * a_, n * a_);
            c_.push_back(w * pair_coupling(Displacement(m * a_, n * a_, 0), o, d, d, gamma_L_, gamma_L_).value);
        }
}

LatticeSum::LatticeSum(const LatticeConfig& config, const std::vector<Eigen::Vector2d>& displacements)
    : a_(config.spacing), gamma_L_(config.gamma_L) {
    const DipolePolarization d = config.dipole();
    const Displacement o = Displacement::Zero();
    for (const auto& r : displacements) {
        if (r.norm() == 0.0) continue;
        r_.push_back(r);
        c_.push_back(pair_coupling(Displacement(r.x(), r.y(), 0), o, d, d, gamma_L_, gamma_L_).value);
    }
}

cplx LatticeSum::operator()(const Eigen::Vector2d& k) const {
    cplx s(0.0, -0.5 * gamma_L_);
    if (half_ >= 0) {
        // Patch terms are stored m-major then n, skipping the origin.
        const int w = 2 * half_ + 1;
        std::vector<cplx> px(w), py(w);
        for (int m = -half_; m <= half_; ++m) {
            px[m + half_] = std::polar(1.0, -k.x() * a_ * m);
            py[m + half_] = std::polar(1.0, -k.y() * a_ * m);
        }
        std::size_t i = 0;
        for (int m = 0; m < w; ++m) {
            cplx row(0.0);
            for (int n = 0; n < w; ++n) {
                if (m == half_ && n == half_) continue;
                row += c_[i++] * py[n];
            }
            s += row * px[m];
        }
        return s;
    }
    for (std::size_t i = 0; i < r_.size(); ++i) s += c_[i] * std::polar(1.0, -k.dot(r_[i]));
    return s;
}

std::vector<Eigen::Vector2d> bz_grid(double spacing, int n) {
    if (n < 1) throw DomainError("k grid needs at least one point per axis");
    const double kmax = std::numbers::pi / spacing;
    std::vector<Eigen::Vector2d> out;
    out.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double kx = n == 1 ? 0.0 : -kmax + 2.0 * kmax * i / (n - 1);
            const double ky = n == 1 ? 0.0 : -kmax + 2.0 * kmax * j / (n - 1);
            out.emplace_back(kx, ky);
        }
    return out;
}

BandStructure band_structure(const LatticeSum& sum, const std::vector<Eigen::Vector2d>& k_grid) {
    const double kmax = std::numbers::pi / sum.spacing();
    BandStructure b;
    b.points.reserve(k_grid.size());
    b.band_edge = -std::numeric_limits<double>::infinity();
    for (const auto& k : k_grid) {
        if (std::abs(k.x()) > kmax * (1 + 1e-12) || std::abs(k.y()) > kmax * (1 + 1e-12))
            throw DomainError("k point outside the first Brillouin zone");
        const cplx v = sum(k);
        b.points.push_back({k.x(), k.y(), v.real(), -2.0 * v.imag(), k.norm() <= kOmegaL});
        if (v.real() > b.band_edge) {
            b.band_edge = v.real();
            b.band_edge_k = k;
        }
    }
    return b;
}

BandStructure band_structure(const LatticeConfig& config, const std::vector<Eigen::Vector2d>& k_grid, int patch) {
    return band_structure(LatticeSum(config, patch), k_grid);
}

BandEdge band_edge(const LatticeConfig& config, int grid, int patch) {
    const BandStructure b = band_structure(config, bz_grid(config.spacing, grid), patch);
    return {b.band_edge, b.band_edge_k};
}

}  // namespace atomarray
