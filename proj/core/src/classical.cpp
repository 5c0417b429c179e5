#include "qbme/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qbme {

double density_of_states(Geometry geometry, double e) {
    if (e < 0) throw std::domain_error("energy must be nonnegative");
    if (geometry == Geometry::Box) return 2.0 * std::numbers::pi * std::sqrt(e);
    return 0.5 * e * e;
}

RateCheck semiclassical_rate_check(const CollisionKernel& kernel, int64_t e1, int64_t e2,
                                   int64_t e3, int64_t e4) {
    if (e1 + e2 != e3 + e4) throw std::invalid_argument("tuple does not conserve energy");
    int64_t emin = std::min(std::min(e1, e2), std::min(e3, e4));
    RateCheck rc;
    switch (kernel.mode()) {
        case PhysicsMode::BoxErgodic:
            rc.discrete = kernel.box_tuple_count(e1, e2, e3, e4);
            rc.predicted = 2.0 * std::pow(std::numbers::pi, 3) * std::sqrt(double(emin));
            break;
        case PhysicsMode::OscErgodic:
            rc.discrete = double(osc_shell_degeneracy(emin));
            rc.predicted = rc.discrete;  // the simulator uses this kernel directly
            break;
        case PhysicsMode::BoxNonErgodic:
            throw std::invalid_argument("rate check applies to ergodic kernels");
    }
    rc.ratio = rc.predicted > 0 ? rc.discrete / rc.predicted : 0.0;
    return rc;
}

double classical_collision_time(const CollisionKernel& kernel,
                                const std::vector<double>& block_mean) {
    if (!kernel.ergodic())
        throw std::invalid_argument("classical comparator applies to ergodic kernels");
    const ModeCatalog& catalog = kernel.catalog();
    double n_total = 0;
    std::vector<uint32_t> live;
    for (size_t b = 0; b < block_mean.size() && b < catalog.block_count(); ++b) {
        n_total += block_mean[b];
        if (block_mean[b] > 1e-7) live.push_back(uint32_t(b));
    }
    double rate = 0;
    std::vector<CollisionVector> splits;
    for (size_t i = 0; i < live.size(); ++i)
        for (size_t j = i; j < live.size(); ++j) {
            uint32_t a = live[i], b = live[j];
            if (catalog.block(a).energy + catalog.block(b).energy >
                catalog.energy_limit())
                continue;  // vanishing tail beyond the catalog
            splits.clear();
            kernel.splits_for_pair(a, b, splits);
            double s = 0;
            for (const auto& cv : splits) s += kernel.structural_factor(cv);
            // Ergodic occupancies enter per mode: B/g per shell.
            rate += s * (block_mean[a] / double(catalog.block(a).degeneracy)) *
                    (block_mean[b] / double(catalog.block(b).degeneracy));
        }
    if (rate <= 0 || n_total <= 0) return std::numeric_limits<double>::infinity();
    return 0.5 * n_total / rate;
}

std::vector<double> classical_boltzmann_rhs(Geometry geometry, const std::vector<double>& f,
                                            double de) {
    if (de <= 0) throw std::domain_error("grid spacing must be positive");
    const int64_t m = int64_t(f.size());
    for (double v : f)
        if (v < 0) throw std::domain_error("f must be nonnegative");

    std::vector<double> rho(size_t(m), 0.0);
    for (int64_t i = 0; i < m; ++i) rho[size_t(i)] = density_of_states(geometry, double(i) * de);

    std::vector<double> out(size_t(m), 0.0);
    for (int64_t i1 = 0; i1 < m; ++i1) {
        double acc = 0;
        for (int64_t i2 = 0; i2 < m; ++i2) {
            double f12 = f[size_t(i1)] * f[size_t(i2)];
            int64_t s = i1 + i2;
            int64_t lo = std::max<int64_t>(0, s - (m - 1));
            int64_t hi = std::min(s, m - 1);
            for (int64_t i3 = lo; i3 <= hi; ++i3) {
                int64_t i4 = s - i3;
                int64_t imin = std::min(std::min(i1, i2), std::min(i3, i4));
                acc += rho[size_t(imin)] * (f[size_t(i3)] * f[size_t(i4)] - f12);
            }
        }
        out[size_t(i1)] = acc * de * de;
    }
    return out;
}

}  // namespace qbme
