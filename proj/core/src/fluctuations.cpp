#include "qbme/fluctuations.hpp"

#include <cmath>
#include <stdexcept>

namespace qbme {

FluctuationResult fluctuation_sum(const ModeCatalog& catalog, const FluctuationSpec& spec) {
    if (spec.levels < 1 || spec.levels > catalog.block_count())
        throw std::invalid_argument("included levels exceed the catalog");
    if (spec.target >= spec.levels)
        throw std::invalid_argument("target level outside the included set");
    if (spec.n < 0 || spec.e < 0) throw std::domain_error("need N, E >= 0");

    const size_t N = size_t(spec.n);
    const size_t E = size_t(spec.e);
    const size_t cols = E + 1;

    uint64_t passes = 0;
    for (size_t l = 0; l < spec.levels; ++l)
        if (l != spec.target) passes += uint64_t(catalog.block(l).degeneracy);
    if (passes * uint64_t(N + 1) * uint64_t(cols) > spec.cell_budget)
        throw std::length_error("fluctuation sum over budget; reduce the included levels");

    // f[n][e]: weighted count of ways to place n particles of total energy e
    // on the non-target modes.  One in-place pass per mode folds in the full
    // geometric series of that mode's occupation.
    std::vector<long double> f((N + 1) * cols, 0.0L);
    f[0] = 1.0L;
    auto at = [&](size_t n, size_t e) -> long double& { return f[n * cols + e]; };
    for (size_t l = 0; l < spec.levels; ++l) {
        if (l == spec.target) continue;
        const auto& blk = catalog.block(l);
        const size_t el = size_t(blk.energy);
        for (int64_t pass = 0; pass < blk.degeneracy; ++pass) {
            for (size_t n = 1; n <= N; ++n)
                for (size_t e = el; e <= E; ++e) at(n, e) += at(n - 1, e - el);
        }
        long double mx = 0;
        for (long double v : f) mx = std::max(mx, v);
        if (mx > 1e4800L)
            for (long double& v : f) v *= 1e-600L;  // global scale cancels later
    }

    const auto& tgt = catalog.block(spec.target);
    const size_t et = size_t(tgt.energy);
    const long double lg = std::lgamma((long double)tgt.degeneracy);
    std::vector<long double> raw(N + 1, 0.0L);
    long double sum = 0;
    for (size_t j = 0; j <= N; ++j) {
        if (et > 0 && j * et > E) break;
        long double weight = std::exp(std::lgamma((long double)(j + tgt.degeneracy)) -
                                      std::lgamma((long double)(j + 1)) - lg);
        raw[j] = weight * at(N - j, E - j * et);
        sum += raw[j];
    }
    if (sum <= 0)
        throw std::domain_error("no configuration of (N, E) fits the included levels");

    FluctuationResult res;
    res.w.resize(N + 1);
    long double mean = 0, m2 = 0;
    for (size_t j = 0; j <= N; ++j) {
        long double p = raw[j] / sum;
        res.w[j] = double(p);
        mean += p * j;
        m2 += p * j * j;
    }
    res.mean = double(mean);
    res.sigma = double(std::sqrt(std::max(m2 - mean * mean, 0.0L)));
    return res;
}

}  // namespace qbme
