#pragma once

#include <cstdint>
#include <vector>

#include "qbme/kernel.hpp"

namespace qbme {

/// Continuum density of states in catalog units: box 2 pi sqrt(e),
/// oscillator e^2 / 2.
double density_of_states(Geometry geometry, double e);

struct RateCheck {
    double discrete = 0;
    double predicted = 0;
    double ratio = 0;
};

/// Discrete ergodic degeneracy factor of a conserving block 4-tuple against
/// its continuum prediction.  Box-ergodic: enumerated momentum-tuple count vs
/// 2 pi^3 sqrt(e_min).  Oscillator: both sides are the g_min kernel (ratio 1).
RateCheck semiclassical_rate_check(const CollisionKernel& kernel, int64_t e1, int64_t e2,
                                   int64_t e3, int64_t e4);

/// Classical per-particle collision time for an ergodic kernel and a
/// time-averaged block occupation profile: the kernel's own structural
/// factors with the Bose enhancement dropped, so occupancies enter as plain
/// products.  This is the mean-field classical Boltzmann collision time for
/// the same cross-section and distribution; the simulated collision time
/// approaches it from below as the gas becomes nondegenerate.
double classical_collision_time(const CollisionKernel& kernel,
                                const std::vector<double>& block_mean);

/// Ergodic classical collision integral I(e1) = rho(e1) df/dt with the Bose
/// enhancement dropped: sum over the energy grid of
/// rho(e_min) (f3 f4 - f1 f2), e4 = e1 + e2 - e3 eliminated on-grid.
/// f is sampled at e_i = i * de.  Rectangle rule; conserves sum I and
/// sum e I exactly up to rounding, and vanishes on exponentials.
std::vector<double> classical_boltzmann_rhs(Geometry geometry, const std::vector<double>& f,
                                            double de);

}  // namespace qbme
