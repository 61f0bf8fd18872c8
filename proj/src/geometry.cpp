#include "atomarray/geometry.hpp"

#include <cmath>
#include <sstream>

namespace atomarray {

const char* to_string(Configuration c) { return c == Configuration::identical ? "identical" : "orthogonal"; }

void LatticeConfig::validate() const {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw DomainError("lattice spacing must be positive");
    if (nx < 2 || ny < 2) throw DomainError("lattice needs at least 2 atoms per side");
    if (!(gamma_L > 0.0)) throw DomainError("lattice linewidth must be positive");
}

Displacement SystemGeometry::position(std::size_t k) const {
    if (k < lattice_positions.size()) return lattice_positions[k];
    k -= lattice_positions.size();
    if (k >= impurities.size()) throw DomainError("site index out of range");
    return impurities[k].position;
}

SystemGeometry build_geometry(const LatticeConfig& config, const std::vector<ImpuritySpec>& impurities) {
    config.validate();
    SystemGeometry g;
    g.lattice = config;
    const double a = config.spacing;
    g.lattice_positions.reserve(static_cast<std::size_t>(config.nx) * config.ny);
    for (int j = 0; j < config.ny; ++j)
        for (int i = 0; i < config.nx; ++i) g.lattice_positions.emplace_back(i * a, j * a, 0.0);

    for (std::size_t n = 0; n < impurities.size(); ++n) {
        const ImpuritySpec& s = impurities[n];
        const auto [pi, pj] = s.plaquette;
        if (pi < 0 || pj < 0 || pi > config.nx - 2 || pj > config.ny - 2) {
            std::ostringstream os;
            os << "impurity " << n << ": plaquette (" << pi << ", " << pj << ") out of bounds";
            throw DomainError(os.str());
        }
        const Eigen::Vector2d off = s.offset.value_or(Eigen::Vector2d(a / 2, a / 2));
        if (!(off.x() > 0.0 && off.x() < a && off.y() > 0.0 && off.y() < a))
            throw DomainError("impurity " + std::to_string(n) + ": offset must lie strictly inside the plaquette");
        if (!(s.gamma > 0.0)) throw DomainError("impurity " + std::to_string(n) + ": linewidth must be positive");
        if (s.gamma / config.gamma_L > 0.1)
            g.warnings.push_back("impurity " + std::to_string(n) + ": gamma_I/gamma_L > 0.1, Markov elimination is questionable");

        PlacedImpurity p{s, Displacement(pi * a + off.x(), pj * a + off.y(), 0.0),
                         s.configuration == Configuration::identical ? config.handedness : opposite(config.handedness)};
        for (const auto& q : g.impurities)
            if ((q.position - p.position).norm() == 0.0)
                throw DomainError("impurity " + std::to_string(n) + ": coincides with an earlier impurity");
        g.impurities.push_back(p);
    }
    return g;
}

double impurity_separation(const SystemGeometry& g, std::size_t i1, std::size_t i2) {
    if (i1 >= g.impurities.size() || i2 >= g.impurities.size()) throw DomainError("impurity index out of range");
    return (g.impurities[i1].position - g.impurities[i2].position).norm();
}

std::array<int, 2> central_plaquette(const LatticeConfig& c) { return {(c.nx - 2) / 2, (c.ny - 2) / 2}; }

std::array<std::array<int, 2>, 2> symmetric_pair(const LatticeConfig& c, int m) {
    if (m < 1 || m > c.nx - 2) throw DomainError("pair separation must be between 1 and nx-2 plaquettes");
    const int j = (c.ny - 2) / 2;
    const int i1 = (c.nx - 2 - m) / 2;
    return {{{i1, j}, {i1 + m, j}}};
}

}  // namespace atomarray
