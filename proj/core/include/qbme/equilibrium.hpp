#pragma once

#include <vector>

#include "qbme/catalog.hpp"

namespace qbme {

/// Grand-canonical fit (mu, T) to targets (N, E) over the catalog's levels
/// (pure finite sum, no continuum tail).  Energies and T share the catalog
/// unit; k_B = 1.
struct EquilibriumSolution {
    double mu = 0;
    double temperature = 0;
    std::vector<double> block_mean;  ///< expected particles per energy block
    double n = 0;
    double e = 0;
};

/// Nested bisection: inner mu from N at fixed T, outer T from E.
/// Residuals below 1e-10 relative.  Throws std::domain_error when no
/// solution exists within the catalog's levels.
EquilibriumSolution solve_grand_canonical(const ModeCatalog& catalog, double n_target,
                                          double e_target);

/// Mean energy of N particles at temperature T (mu solved for N).
double energy_for_temperature(const ModeCatalog& catalog, double n_target, double T);

/// Thermodynamic-limit critical temperature in catalog units.
double critical_temperature(Geometry geometry, double n);

/// Geometric condensate pmf p(k) = (1-eta) eta^k with eta = mean/(1+mean),
/// truncated to `count` entries.
std::vector<double> bose_geometric_pmf(double mean, size_t count);

}  // namespace qbme
