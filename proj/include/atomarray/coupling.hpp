#pragma once

#include <vector>

#include <Eigen/Dense>

#include "atomarray/geometry.hpp"

namespace atomarray {

// Lattice block of the single-excitation Hamiltonian (detuning excluded):
// off-diagonal J - i Gamma/2, diagonal -i gamma_L/2.
struct CouplingMatrix {
    Eigen::MatrixXcd matrix;
    std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
};

// Impurity <-> lattice couplings. to_lattice[p] couples the impurity into
// atom p (lattice row, impurity column); from_lattice[p] is the reverse
// element. They coincide when the impurity shares the lattice polarization.
struct ImpurityCouplingVector {
    Eigen::VectorXcd to_lattice;
    Eigen::VectorXcd from_lattice;
};

CouplingMatrix assemble_lattice_matrix(const SystemGeometry& g);
ImpurityCouplingVector impurity_vector(const SystemGeometry& g, std::size_t impurity_index);

// Eigendecomposition M = V diag(lambda) V^-1. Columns of V are scaled so
// v^T v = 1 where that is possible; left vectors come from the inverse, so
// sums over modes only depend on spectral projectors.
struct ModalDecomposition {
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXcd right;
    Eigen::MatrixXcd left;  // = right^-1, rows are left eigenvectors
    double inverse_residual = 0.0;

    static ModalDecomposition of(const Eigen::MatrixXcd& m);
    cplx nearest_eigenvalue(cplx z) const;
};

struct BandPoint {
    double kx, ky;
    double J, Gamma;
    bool in_light_cone;
};

struct BandStructure {
    std::vector<BandPoint> points;
    double band_edge = 0.0;
    Eigen::Vector2d band_edge_k = Eigen::Vector2d::Zero();
};

// Weighting of the truncated patch sum. Fejer weights
// (1 - |m|/(h+1))(1 - |n|/(h+1)) keep Gamma(k) non-negative because the
// lattice dissipation matrix is positive semidefinite.
enum class PatchWindow { none, fejer };

// Lattice Fourier sum -i gamma_L/2 + sum_{r != 0} c(r) exp(-i k.r) over an
// explicit set of displacements.
class LatticeSum {
public:
    // Square patch of displacements (m a, n a), |m|,|n| <= patch/2.
    LatticeSum(const LatticeConfig& config, int patch = 40, PatchWindow window = PatchWindow::none);
    LatticeSum(const LatticeConfig& config, const std::vector<Eigen::Vector2d>& displacements);

    cplx operator()(const Eigen::Vector2d& k) const;
    double spacing() const { return a_; }

private:
    double a_;
    double gamma_L_;
    int half_ = -1;  // >= 0 for a square patch, enables separable phases
    std::vector<Eigen::Vector2d> r_;
    std::vector<cplx> c_;
};

std::vector<Eigen::Vector2d> bz_grid(double spacing, int n);

BandStructure band_structure(const LatticeConfig& config, const std::vector<Eigen::Vector2d>& k_grid, int patch = 40);
BandStructure band_structure(const LatticeSum& sum, const std::vector<Eigen::Vector2d>& k_grid);

struct BandEdge {
    double value;
    Eigen::Vector2d k;
};
BandEdge band_edge(const LatticeConfig& config, int grid = 101, int patch = 40);

}  // namespace atomarray
