#include "qbme/equilibrium.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qbme {

namespace {

constexpr double kZeta32 = 2.6123753486854883;  // zeta(3/2)
constexpr double kZeta3 = 1.2020569031595943;   // zeta(3)

void gc_sums(const ModeCatalog& c, double mu, double T, double& n, double& e) {
    n = 0;
    e = 0;
    for (size_t b = 0; b < c.block_count(); ++b) {
        const auto& blk = c.block(b);
        double occ = double(blk.degeneracy) / std::expm1((double(blk.energy) - mu) / T);
        n += occ;
        e += occ * double(blk.energy);
    }
}

// mu below the ground energy such that N(mu, T) = n_target; bisection on
// s = log(e0 - mu), where N is monotone decreasing in s.
double solve_mu(const ModeCatalog& c, double n_target, double T) {
    const double e0 = double(c.block(0).energy);
    double s_lo = std::log(1e-250);  // mu -> e0: N -> infinity
    double s_hi = 0.0;               // gap 1
    double n, e;
    for (int i = 0; i < 200; ++i) {
        gc_sums(c, e0 - std::exp(s_hi), T, n, e);
        if (n < n_target) break;
        s_hi += 2.0;
        if (i == 199) throw std::domain_error("chemical potential bracket failed");
    }
    for (int i = 0; i < 500; ++i) {
        double s = 0.5 * (s_lo + s_hi);
        gc_sums(c, e0 - std::exp(s), T, n, e);
        if (std::abs(n - n_target) <= 1e-12 * n_target) return e0 - std::exp(s);
        (n > n_target ? s_lo : s_hi) = s;
    }
    return e0 - std::exp(0.5 * (s_lo + s_hi));
}

double energy_at(const ModeCatalog& c, double n_target, double T) {
    double n, e;
    gc_sums(c, solve_mu(c, n_target, T), T, n, e);
    return e;
}

}  // namespace

double energy_for_temperature(const ModeCatalog& catalog, double n_target, double T) {
    if (n_target < 1 || T <= 0) throw std::domain_error("need N >= 1 and T > 0");
    return energy_at(catalog, n_target, T);
}

EquilibriumSolution solve_grand_canonical(const ModeCatalog& catalog, double n_target,
                                          double e_target) {
    if (n_target < 1) throw std::domain_error("need N >= 1");
    const double e0 = double(catalog.block(0).energy);
    const double e_min = n_target * e0;
    if (e_target < e_min) throw std::domain_error("energy below the ground-state minimum");

    // Outer bisection on s = log T; E(T) at fixed N is monotone increasing.
    double s_lo = std::log(1e-12);
    double s_hi = 0.0;
    for (;;) {
        if (energy_at(catalog, n_target, std::exp(s_hi)) >= e_target) break;
        s_hi += 1.0;
        if (s_hi > 40.0)
            throw std::domain_error("energy target exceeds the catalog's level range");
    }
    const double tol = 1e-10 * std::max(std::abs(e_target), 1.0);
    double T = std::exp(0.5 * (s_lo + s_hi));
    for (int i = 0; i < 500; ++i) {
        T = std::exp(0.5 * (s_lo + s_hi));
        double e = energy_at(catalog, n_target, T);
        if (std::abs(e - e_target) <= tol) break;
        (e > e_target ? s_hi : s_lo) = 0.5 * (s_lo + s_hi);
    }

    EquilibriumSolution sol;
    sol.temperature = T;
    sol.mu = solve_mu(catalog, n_target, T);
    gc_sums(catalog, sol.mu, T, sol.n, sol.e);
    sol.block_mean.resize(catalog.block_count());
    for (size_t b = 0; b < catalog.block_count(); ++b) {
        const auto& blk = catalog.block(b);
        sol.block_mean[b] =
            double(blk.degeneracy) / std::expm1((double(blk.energy) - sol.mu) / T);
    }
    return sol;
}

double critical_temperature(Geometry geometry, double n) {
    if (n < 1) throw std::domain_error("need N >= 1");
    if (geometry == Geometry::Box)
        return std::pow(n / kZeta32, 2.0 / 3.0) / std::numbers::pi;
    return std::cbrt(n / kZeta3);
}

std::vector<double> bose_geometric_pmf(double mean, size_t count) {
    if (mean < 0) throw std::domain_error("mean must be nonnegative");
    double eta = mean / (1.0 + mean);
    std::vector<double> p(count);
    double w = 1.0 - eta;
    for (size_t k = 0; k < count; ++k) {
        p[k] = w;
        w *= eta;
    }
    return p;
}

}  // namespace qbme
