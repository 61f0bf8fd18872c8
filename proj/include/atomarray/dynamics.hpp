#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atomarray/coupling.hpp"

namespace atomarray {

// Single-excitation Hamiltonian in the frame rotating at omega_I. Lattice
// atoms first (row-major), impurities after them in input order.
struct FullHamiltonian {
    Eigen::MatrixXcd matrix;
    std::size_t n_lattice = 0;
    std::size_t n_impurities = 0;
    std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
    std::size_t impurity_site(std::size_t k) const { return n_lattice + k; }
};

FullHamiltonian build_full_hamiltonian(const SystemGeometry& g, double delta, bool include_lattice = true);

enum class EvolveMethod { automatic, eigen, integrate };

struct TimeSeries {
    std::vector<double> t;
    Eigen::MatrixXcd amplitudes;  // sites x times
    bool used_integrator = false;

    double population(std::size_t site, std::size_t ti) const { return std::norm(amplitudes(site, ti)); }
    double total_population(std::size_t ti) const { return amplitudes.col(ti).squaredNorm(); }
    std::vector<double> population_series(std::size_t site) const;
};

// Caches the eigendecomposition of H; falls back to adaptive integration
// when the eigenvectors are too ill-conditioned to invert reliably.
class Propagator {
public:
    explicit Propagator(const FullHamiltonian& h, EvolveMethod method = EvolveMethod::automatic);

    bool uses_integrator() const { return integrate_; }
    TimeSeries evolve(const Eigen::VectorXcd& initial, const std::vector<double>& t_grid) const;

private:
    Eigen::MatrixXcd h_;
    bool integrate_ = false;
    Eigen::VectorXcd lambda_;
    Eigen::MatrixXcd v_, vinv_;
};

TimeSeries evolve(const FullHamiltonian& h, const Eigen::VectorXcd& initial, const std::vector<double>& t_grid,
                  EvolveMethod method = EvolveMethod::automatic);

// 2000 uniform points over [0, 10 / gamma_pred].
std::vector<double> default_time_grid(double gamma_pred, int points = 2000);

// Short densely sampled windows spread uniformly over [0, total], each
// covering `periods` oscillation periods with `per_period` samples per period.
std::vector<double> windowed_time_grid(double period, double total, int windows, int per_period = 40,
                                       double periods = 3.0);

struct TransferMetrics {
    double frequency = 0.0;  // pi / transfer period
    double decay = 0.0;      // envelope decay rate
    double quality = 0.0;    // frequency / decay
    std::size_t maxima = 0;
    std::vector<double> peak_times;
};

class MetricsUnavailable : public std::runtime_error {
public:
    MetricsUnavailable(const std::string& what, TransferMetrics partial)
        : std::runtime_error(what), partial(std::move(partial)) {}
    TransferMetrics partial;
};

// Frequency from the spacing of population maxima on site q; decay from the
// maxima of the exchange contrast |p_s - p_q|. A positive `smoothing` time
// box-averages both populations first, which suppresses fast lattice-induced
// modulations when the transfer itself is much slower.
TransferMetrics transfer_metrics(const TimeSeries& ts, std::size_t site_s, std::size_t site_q,
                                 double smoothing = 0.0);

// Fraction of the spectral weight of the (mean-removed) population on
// `site` lying above angular frequency `cutoff`. Needs a uniform grid.
double spectral_weight_above(const TimeSeries& ts, std::size_t site, double cutoff);

}  // namespace atomarray
