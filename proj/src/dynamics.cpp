#include "atomarray/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/numeric/odeint.hpp>

#include "atomarray/fit.hpp"

namespace atomarray {

FullHamiltonian build_full_hamiltonian(const SystemGeometry& g, double delta, bool include_lattice) {
    const std::size_t n = include_lattice ? g.lattice_size() : 0;
    const std::size_t k = g.impurities.size();
    FullHamiltonian h;
    h.n_lattice = n;
    h.n_impurities = k;
    h.matrix = Eigen::MatrixXcd::Zero(n + k, n + k);
    if (n > 0) {
        h.matrix.topLeftCorner(n, n) = assemble_lattice_matrix(g).matrix;
        for (std::size_t p = 0; p < n; ++p) h.matrix(p, p) -= delta;
        for (std::size_t j = 0; j < k; ++j) {
            const ImpurityCouplingVector v = impurity_vector(g, j);
            h.matrix.block(0, n + j, n, 1) = v.to_lattice;
            h.matrix.block(n + j, 0, 1, n) = v.from_lattice.transpose();
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        const PlacedImpurity& a = g.impurities[j];
        h.matrix(n + j, n + j) = cplx(0.0, -0.5 * a.spec.gamma);
        for (std::size_t l = 0; l < k; ++l) {
            if (l == j) continue;
            const PlacedImpurity& b = g.impurities[l];
            h.matrix(n + j, n + l) =
                pair_coupling(a.position, b.position, a.dipole(), b.dipole(), a.spec.gamma, b.spec.gamma).value;
        }
    }
    return h;
}

std::vector<double> TimeSeries::population_series(std::size_t site) const {
    std::vector<double> p(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) p[i] = population(site, i);
    return p;
}

Propagator::Propagator(const FullHamiltonian& h, EvolveMethod method) : h_(h.matrix) {
    if (method == EvolveMethod::integrate) {
        integrate_ = true;
        return;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h_, true);
    bool ok = es.info() == Eigen::Success;
    if (ok) {
        lambda_ = es.eigenvalues();
        v_ = es.eigenvectors();
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(v_);
        ok = lu.rcond() > 1e-10;
        if (ok) {
            vinv_ = lu.inverse();
            const Eigen::Index n = h_.rows();
            ok = (vinv_ * v_ - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8;
        }
    }
    if (!ok) {
        if (method == EvolveMethod::eigen) throw std::runtime_error("eigendecomposition is ill-conditioned");
        integrate_ = true;
    }
}

TimeSeries Propagator::evolve(const Eigen::VectorXcd& initial, const std::vector<double>& t_grid) const {
    const Eigen::Index n = h_.rows();
    if (initial.size() != n) throw DomainError("initial state has the wrong dimension");
    if (initial.squaredNorm() > 1.0 + 1e-12) throw DomainError("initial state norm exceeds 1");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1])) throw DomainError("time grid must be strictly increasing");

    TimeSeries ts;
    ts.t = t_grid;
    ts.amplitudes.resize(n, static_cast<Eigen::Index>(t_grid.size()));
    ts.used_integrator = integrate_;
    if (t_grid.empty()) return ts;

    if (!integrate_) {
        const Eigen::VectorXcd w = vinv_ * initial;
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            const double t = t_grid[i];
            if (t == 0.0) {
                ts.amplitudes.col(i) = initial;
                continue;
            }
            Eigen::VectorXcd e(n);
            for (Eigen::Index k = 0; k < n; ++k) e(k) = w(k) * std::exp(cplx(0.0, -1.0) * lambda_(k) * t);
            ts.amplitudes.col(i) = v_ * e;
        }
        return ts;
    }

    using state = std::vector<cplx>;
    namespace ode = boost::numeric::odeint;
    const Eigen::MatrixXcd& H = h_;
    auto rhs = [&H, n](const state& x, state& dx, double) {
        Eigen::Map<const Eigen::VectorXcd> xv(x.data(), n);
        Eigen::Map<Eigen::VectorXcd> dv(dx.data(), n);
        dv.noalias() = cplx(0.0, -1.0) * (H * xv);
    };
    state x(initial.data(), initial.data() + n);
    std::size_t idx = 0;
    auto observe = [&](const state& s, double) {
        for (Eigen::Index k = 0; k < n; ++k) ts.amplitudes(k, static_cast<Eigen::Index>(idx)) = s[k];
        ++idx;
    };
    const double t0 = t_grid.front();
    if (t0 != 0.0) {
        // Bring the state from t = 0 to the first grid time.
        ode::integrate_adaptive(ode::make_dense_output(1e-12, 1e-10, ode::runge_kutta_dopri5<state>()), rhs, x, 0.0,
                                t0, t0 / 100);
    }
    const double dt0 = t_grid.size() > 1 ? (t_grid[1] - t_grid[0]) / 10 : 1e-3;
    ode::integrate_times(ode::make_dense_output(1e-12, 1e-10, ode::runge_kutta_dopri5<state>()), rhs, x,
                         t_grid.begin(), t_grid.end(), dt0, observe);
    return ts;
}

TimeSeries evolve(const FullHamiltonian& h, const Eigen::VectorXcd& initial, const std::vector<double>& t_grid,
                  EvolveMethod method) {
    return Propagator(h, method).evolve(initial, t_grid);
}

std::vector<double> default_time_grid(double gamma_pred, int points) {
    if (!(gamma_pred > 0.0)) throw DomainError("predicted linewidth must be positive");
    if (points < 2) throw DomainError("time grid needs at least 2 points");
    std::vector<double> t(points);
    const double tmax = 10.0 / gamma_pred;
    for (int i = 0; i < points; ++i) t[i] = tmax * i / (points - 1);
    return t;
}

std::vector<double> windowed_time_grid(double period, double total, int windows, int per_period, double periods) {
    if (!(period > 0.0) || !(total > 0.0) || windows < 1 || per_period < 4)
        throw DomainError("invalid windowed grid parameters");
    const double span = periods * period;
    const int samples = static_cast<int>(std::ceil(periods * per_period)) + 1;
    std::vector<double> t;
    for (int w = 0; w < windows; ++w) {
        const double start = windows == 1 ? 0.0 : (total - span) * w / (windows - 1);
        for (int s = 0; s < samples; ++s) {
            const double v = std::max(0.0, start) + span * s / (samples - 1);
            if (t.empty() || v > t.back()) t.push_back(v);
        }
    }
    return t;
}

namespace {

struct Peak {
    double t, value;
    std::size_t segment;
};

// Splits the grid where a gap exceeds five times the median step.
std::vector<std::size_t> segment_ids(const std::vector<double>& t) {
    std::vector<std::size_t> seg(t.size(), 0);
    if (t.size() < 3) return seg;
    std::vector<double> d(t.size() - 1);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) d[i] = t[i + 1] - t[i];
    std::vector<double> sorted = d;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double med = sorted[sorted.size() / 2];
    for (std::size_t i = 1; i < t.size(); ++i) seg[i] = seg[i - 1] + (d[i - 1] > 5.0 * med ? 1 : 0);
    return seg;
}

// Parabola through three samples; returns the vertex when it lies between
// the outer samples, otherwise the middle sample.
Peak refine(const std::vector<double>& t, const std::vector<double>& y, std::size_t i, std::size_t seg) {
    const double t0 = t[i - 1], t1 = t[i], t2 = t[i + 1];
    const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
    const double d01 = (y1 - y0) / (t1 - t0), d12 = (y2 - y1) / (t2 - t1);
    const double c2 = (d12 - d01) / (t2 - t0);
    Peak p{t1, y1, seg};
    if (c2 < 0) {
        const double c1 = d01 - c2 * (t0 + t1);
        const double tv = -c1 / (2 * c2);
        if (tv > t0 && tv < t2) {
            p.t = tv;
            p.value = std::max(y1, y1 + d01 * (tv - t1) + c2 * (tv - t0) * (tv - t1));
        }
    }
    return p;
}

// One maximum of `y` per run of samples where `inside` holds. Runs touching
// a sampling-window edge are dropped since their true peak may be unsampled.
std::vector<Peak> run_maxima(const std::vector<double>& t, const std::vector<double>& y,
                             const std::vector<std::size_t>& seg, const std::vector<bool>& inside) {
    std::vector<Peak> out;
    const std::size_t n = t.size();
    std::size_t i = 0;
    while (i < n) {
        if (!inside[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && inside[j + 1] && seg[j + 1] == seg[i]) ++j;
        const bool open_left = i == 0 || seg[i - 1] != seg[i];
        const bool open_right = j + 1 >= n || seg[j + 1] != seg[j];
        if (!open_left && !open_right) {
            std::size_t best = i;
            for (std::size_t k = i; k <= j; ++k)
                if (y[k] > y[best]) best = k;
            out.push_back(refine(t, y, best, seg[i]));
        }
        i = j + 1;
    }
    return out;
}

// Centered box average of width `tau` in time, not crossing window gaps.
std::vector<double> box_average(const std::vector<double>& t, const std::vector<double>& y,
                                const std::vector<std::size_t>& seg, double tau) {
    std::vector<double> out(y.size());
    std::size_t lo = 0, hi = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        while (hi < y.size() && seg[hi] == seg[i] && t[hi] <= t[i] + tau / 2) acc += y[hi++];
        while (lo < i && (seg[lo] != seg[i] || t[lo] < t[i] - tau / 2)) acc -= y[lo++];
        out[i] = acc / static_cast<double>(hi - lo);
    }
    return out;
}

}  // namespace

TransferMetrics transfer_metrics(const TimeSeries& ts, std::size_t s, std::size_t q, double smoothing) {
    const Eigen::Index n = ts.amplitudes.rows();
    if (static_cast<Eigen::Index>(std::max(s, q)) >= n) throw DomainError("site index out of range");
    const auto seg = segment_ids(ts.t);
    std::vector<double> pq = ts.population_series(q);
    std::vector<double> ps = ts.population_series(s);
    if (smoothing > 0) {
        pq = box_average(ts.t, pq, seg, smoothing);
        ps = box_average(ts.t, ps, seg, smoothing);
    }

    // A transfer half-cycle is a run where q holds clearly more of the
    // impurity excitation than s. The run opens when q holds 3/4 of it and
    // closes at the crossing, so lattice-induced ripples do not split it.
    const std::size_t len = ts.t.size();
    std::vector<bool> q_side(len, false), s_side(len, false);
    std::vector<double> contrast(len);
    int state = 0;
    for (std::size_t i = 0; i < len; ++i) {
        if (i > 0 && seg[i] != seg[i - 1]) state = 0;
        const double sum = ps[i] + pq[i];
        const double r = sum > 0 ? (pq[i] - ps[i]) / sum : 0.0;
        if (state == 1 && r < 0) state = 0;
        if (state == -1 && r > 0) state = 0;
        if (state == 0 && r > 0.5) state = 1;
        if (state == 0 && r < -0.5) state = -1;
        q_side[i] = state == 1;
        s_side[i] = state == -1;
        contrast[i] = std::abs(ps[i] - pq[i]);
    }

    TransferMetrics m;
    const std::vector<Peak> peaks = run_maxima(ts.t, pq, seg, q_side);
    m.maxima = peaks.size();
    for (const auto& p : peaks) m.peak_times.push_back(p.t);
    if (peaks.size() < 3) throw MetricsUnavailable("fewer than 3 transfer maxima", m);

    // Period estimate from consecutive peaks within a segment, then a global
    // fit of peak time against peak number.
    std::vector<double> within;
    for (std::size_t i = 1; i < peaks.size(); ++i)
        if (peaks[i].segment == peaks[i - 1].segment) within.push_back(peaks[i].t - peaks[i - 1].t);
    if (within.empty()) throw MetricsUnavailable("no consecutive maxima inside one sampling window", m);
    std::nth_element(within.begin(), within.begin() + within.size() / 2, within.end());
    const double t_est = within[within.size() / 2];
    std::vector<double> number, times;
    for (const auto& p : peaks) {
        number.push_back(std::round((p.t - peaks.front().t) / t_est));
        times.push_back(p.t);
    }
    const LineFit period = fit_line(number, times);
    m.frequency = std::numbers::pi / period.slope;

    // Each half-cycle's contrast maximum samples the decay envelope.
    std::vector<Peak> env = run_maxima(ts.t, contrast, seg, q_side);
    const std::vector<Peak> env_s = run_maxima(ts.t, contrast, seg, s_side);
    env.insert(env.end(), env_s.begin(), env_s.end());
    std::vector<double> et, ey;
    for (const Peak& p : env) {
        if (!(p.value > 0)) continue;
        et.push_back(p.t);
        ey.push_back(std::log(p.value));
    }
    if (et.size() < 2) throw MetricsUnavailable("exchange contrast has too few maxima for an envelope fit", m);
    m.decay = -fit_line(et, ey).slope;
    m.quality = m.decay != 0.0 ? m.frequency / m.decay : std::numeric_limits<double>::infinity();
    return m;
}

double spectral_weight_above(const TimeSeries& ts, std::size_t site, double cutoff) {
    const std::size_t n = ts.t.size();
    if (n < 8) throw DomainError("spectrum needs at least 8 samples");
    const double dt = ts.t[1] - ts.t[0];
    for (std::size_t i = 2; i < n; ++i)
        if (std::abs((ts.t[i] - ts.t[i - 1]) - dt) > 1e-9 * dt) throw DomainError("spectrum needs a uniform grid");
    std::vector<double> p = ts.population_series(site);
    const double mean = std::accumulate(p.begin(), p.end(), 0.0) / n;
    for (auto& v : p) v -= mean;
    double total = 0, above = 0;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        const double w = 2 * std::numbers::pi * k / (n * dt);
        cplx acc(0.0);
        for (std::size_t i = 0; i < n; ++i) acc += p[i] * std::polar(1.0, -w * ts.t[i]);
        const double power = std::norm(acc);
        total += power;
        if (w > cutoff) above += power;
    }
    return total > 0 ? above / total : 0.0;
}

}  // namespace atomarray
