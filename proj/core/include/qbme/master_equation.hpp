#pragma once

#include <cstdint>
#include <vector>

#include "qbme/kernel.hpp"

namespace qbme {

/// Exact stationary law of the collision master equation on the class of
/// configurations reachable from an initial state.  Small systems only.
struct MasterEquationResult {
    std::vector<std::vector<int64_t>> states;  ///< occupation vectors
    std::vector<double> stationary;            ///< aligned with `states`
    /// log microstate multiplicity of each configuration (product of per-block
    /// multiset counts); identically zero in the mode-resolved representation.
    std::vector<double> multiplicity_log;
};

/// BFS from `initial` through all channels, dense generator assembled
/// sparsely, stationary distribution solved exactly.  Throws
/// std::length_error when the reachable class exceeds `max_states`.
MasterEquationResult exact_master_equation(const CollisionKernel& kernel,
                                           const OccupationState& initial,
                                           size_t max_states = 10000);

}  // namespace qbme
