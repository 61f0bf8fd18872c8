#include "atomarray/two_impurity.hpp"

#include <cmath>
#include <stdexcept>

#include "atomarray/parallel.hpp"

namespace atomarray {

cplx free_space_phi(const SystemGeometry& g, std::size_t i1, std::size_t i2) {
    if (i1 >= g.impurities.size() || i2 >= g.impurities.size()) throw DomainError("impurity index out of range");
    const PlacedImpurity& p = g.impurities[i1];
    const PlacedImpurity& q = g.impurities[i2];
    return pair_coupling(p.position, q.position, p.dipole(), q.dipole(), p.spec.gamma, q.spec.gamma).value;
}

cplx effective_interaction(const Resolvent& r, const ImpurityCouplingVector& v1, const ImpurityCouplingVector& v2,
                           cplx phi) {
    const cplx lat = v1.from_lattice.transpose() * r.solve(v2.to_lattice);
    return std::conj(lat) + phi;
}

cplx effective_interaction(const CouplingMatrix& m, const ImpurityCouplingVector& v1,
                           const ImpurityCouplingVector& v2, double delta, cplx phi) {
    return effective_interaction(Resolvent(m, delta), v1, v2, phi);
}

double q2(cplx phi_eff, double gamma_eff) {
    if (!(gamma_eff > 0.0)) throw UnphysicalError("Q2 needs a positive effective linewidth");
    return phi_eff.real() / gamma_eff;
}

TwoImpurityResult two_impurity(const SystemGeometry& g, const Resolvent& r) {
    if (g.impurities.size() != 2) throw DomainError("two-impurity analysis needs exactly two impurities");
    const auto& s1 = g.impurities[0].spec;
    const auto& s2 = g.impurities[1].spec;
    if (s1.gamma != s2.gamma || s1.configuration != s2.configuration)
        throw DomainError("both impurities must be of the same species");
    const ImpurityCouplingVector v1 = impurity_vector(g, 0);
    const ImpurityCouplingVector v2 = impurity_vector(g, 1);
    TwoImpurityResult out;
    out.delta = r.delta();
    out.configuration = s1.configuration;
    out.d = impurity_separation(g, 0, 1);
    out.phi = free_space_phi(g, 0, 1);
    out.gamma_eff_1 = s1.gamma - 2.0 * self_energy(r, v1).imag();
    out.gamma_eff_2 = s2.gamma - 2.0 * self_energy(r, v2).imag();
    out.phi_eff = effective_interaction(r, v1, v2, out.phi);
    out.q2 = q2(out.phi_eff, out.gamma_eff_1);
    out.q2_free = out.phi.real() / s1.gamma;
    return out;
}

TwoImpurityResult two_impurity(const SystemGeometry& g, double delta) {
    const CouplingMatrix m = assemble_lattice_matrix(g);
    return two_impurity(g, Resolvent(m, delta));
}

OperatingPoint OperatingPoint::default_for(Configuration c) {
    if (c == Configuration::identical) return {Kind::dark, 0.0};
    return {Kind::band_edge_multiple, 1.05};
}

OperatingPoint::Kind parse_operating_kind(const std::string& s) {
    using K = OperatingPoint::Kind;
    if (s == "absolute") return K::absolute;
    if (s == "band_edge") return K::band_edge_multiple;
    if (s == "dark") return K::dark;
    if (s == "dark_band") return K::dark_band;
    if (s == "dark_in_phase") return K::dark_in_phase;
    throw std::invalid_argument("unknown detuning kind '" + s + "'");
}

const char* to_string(OperatingPoint::Kind k) {
    using K = OperatingPoint::Kind;
    switch (k) {
        case K::absolute: return "absolute";
        case K::band_edge_multiple: return "band_edge";
        case K::dark: return "dark";
        case K::dark_band: return "dark_band";
        case K::dark_in_phase: return "dark_in_phase";
    }
    return "?";
}

double resolve_detuning(const OperatingPoint& op, const LatticeConfig& config, Configuration c, double gamma_I,
                        const DetuningOptions& opt) {
    using K = OperatingPoint::Kind;
    if (op.kind == K::absolute) return op.value;
    if (op.kind == K::band_edge_multiple) return op.value * band_edge(config, opt.band_grid, opt.patch).value;

    ImpuritySpec s;
    s.plaquette = central_plaquette(config);
    s.gamma = gamma_I;
    s.configuration = c;
    const SystemGeometry g = build_geometry(config, {s});
    const CouplingMatrix m = assemble_lattice_matrix(g);
    const ImpurityCouplingVector v = impurity_vector(g, 0);
    if (op.kind == K::dark_in_phase) return optimal_dark_detuning(in_phase_mode_data(m, v));
    if (op.kind == K::dark_band) return optimal_dark_detuning(band_mode_data(LatticeSum(config, opt.patch), g, v, 0));
    return minimize_linewidth(ModalDecomposition::of(m.matrix), v, gamma_I);
}

DistanceScan distance_scan(const LatticeConfig& config, Configuration c, double gamma_I, double delta,
                           const std::vector<int>& m_list, unsigned threads) {
    DistanceScan out;
    out.a = config.spacing;
    out.delta = delta;
    out.m = m_list;
    out.rows.resize(m_list.size());

    // The lattice block does not depend on where the impurities sit.
    const SystemGeometry bare = build_geometry(config, {});
    const CouplingMatrix mat = assemble_lattice_matrix(bare);
    const Resolvent r(mat, delta);

    parallel_for(m_list.size(), threads, [&](std::size_t i) {
        const auto pair = symmetric_pair(config, m_list[i]);
        ImpuritySpec s1, s2;
        s1.plaquette = pair[0];
        s2.plaquette = pair[1];
        s1.gamma = s2.gamma = gamma_I;
        s1.configuration = s2.configuration = c;
        out.rows[i] = two_impurity(build_geometry(config, {s1, s2}), r);
    });

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        const auto& row = out.rows[i];
        if (!(std::abs(row.q2) > 3.0 * std::abs(row.q2_free))) break;
        out.region_end = m_list[i];
        xs.push_back(row.d);
        ys.push_back(row.q2);
    }
    try {
        out.fit = fit_exponential(xs, ys);
    } catch (const FitError& e) {
        out.fit_error = e.what();
    }
    return out;
}

SpacingScan spacing_scan(const std::vector<double>& a_list, int nx, int ny, double gamma_I,
                         const OperatingPoint& identical_op, const OperatingPoint& orthogonal_op, unsigned threads,
                         const DetuningOptions& opt) {
    SpacingScan out;
    out.rows.resize(a_list.size());
    parallel_for(a_list.size(), threads, [&](std::size_t i) {
        LatticeConfig lc;
        lc.spacing = a_list[i];
        lc.nx = nx;
        lc.ny = ny;
        SpacingRow& row = out.rows[i];
        row.a = a_list[i];
        row.delta_identical = resolve_detuning(identical_op, lc, Configuration::identical, gamma_I, opt);
        row.delta_orthogonal = resolve_detuning(orthogonal_op, lc, Configuration::orthogonal, gamma_I, opt);
        const DistanceScan di = distance_scan(lc, Configuration::identical, gamma_I, row.delta_identical, {1});
        const DistanceScan dO = distance_scan(lc, Configuration::orthogonal, gamma_I, row.delta_orthogonal, {1});
        row.q2_identical = di.rows[0].q2;
        row.q2_orthogonal = dO.rows[0].q2;
        row.q2_free = di.rows[0].q2_free;
    });
    std::vector<double> a, qi, qo, qf;
    for (const auto& r : out.rows) {
        a.push_back(r.a);
        qi.push_back(r.q2_identical);
        qo.push_back(r.q2_orthogonal);
        qf.push_back(r.q2_free);
    }
    try {
        out.identical = fit_power_law(a, qi);
        out.orthogonal = fit_power_law(a, qo);
        out.free_space = fit_power_law(a, qf);
    } catch (const FitError& e) {
        out.fit_error = e.what();
    }
    return out;
}

std::vector<ReachRow> reach_scan(const std::vector<double>& a_list, int nx, int ny, Configuration c,
                                 double gamma_I, const OperatingPoint& op, double threshold, unsigned threads,
                                 const DetuningOptions& opt) {
    std::vector<ReachRow> out(a_list.size());
    parallel_for(a_list.size(), threads, [&](std::size_t i) {
        LatticeConfig lc;
        lc.spacing = a_list[i];
        lc.nx = nx;
        lc.ny = ny;
        const double delta = resolve_detuning(op, lc, c, gamma_I, opt);
        std::vector<int> ms;
        for (int m = 1; m <= nx - 2; ++m) ms.push_back(m);
        const DistanceScan s = distance_scan(lc, c, gamma_I, delta, ms);
        ReachRow row{a_list[i], delta, 0, 0.0};
        for (std::size_t k = 0; k < s.rows.size(); ++k) {
            const double q = std::abs(s.rows[k].q2);
            row.q2_max = std::max(row.q2_max, q);
            if (q > threshold) row.reach = ms[k];
        }
        out[i] = row;
    });
    return out;
}

}  // namespace atomarray
