#pragma once

#include <cstdint>
#include <vector>

#include "qbme/catalog.hpp"

namespace qbme {

struct FluctuationSpec {
    size_t levels = 17;        ///< lowest energy blocks included
    size_t target = 0;         ///< block whose particle-count law is returned
    int64_t n = 0;
    int64_t e = 0;
    uint64_t cell_budget = 400000000;  ///< DP table cells x mode passes
};

struct FluctuationResult {
    std::vector<double> w;  ///< w[j] = P(target block holds j particles)
    double mean = 0;
    double sigma = 0;
};

/// Distribution of the particle count in one energy block over all
/// configurations of (N, E) within the included blocks, each configuration
/// weighted by its microstate multiplicity (product of per-block bosonic
/// multiset counts).  Deterministic counting, no sampling.
FluctuationResult fluctuation_sum(const ModeCatalog& catalog, const FluctuationSpec& spec);

}  // namespace qbme
