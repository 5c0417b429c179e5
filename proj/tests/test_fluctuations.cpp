#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "qbme/fluctuations.hpp"

using namespace qbme;

namespace {

// Exact oracle: recursive enumeration of all block configurations with the
// requested totals, weighted by the product of per-block multiset counts.
struct Brute {
    const ModeCatalog* c;
    size_t levels;
    std::vector<double> w;  // P(block 0 holds j)
    double norm = 0;

    double multiset(int64_t g, int64_t b) {
        return std::exp(std::lgamma(double(b + g)) - std::lgamma(double(b + 1)) -
                        std::lgamma(double(g)));
    }

    void rec(size_t blk, int64_t n_left, int64_t e_left, double weight, int64_t j0) {
        if (blk == levels) {
            if (n_left == 0 && e_left == 0) {
                w[size_t(j0)] += weight;
                norm += weight;
            }
            return;
        }
        const auto& b = c->block(blk);
        for (int64_t k = 0; k <= n_left; ++k) {
            if (b.energy * k > e_left) break;
            rec(blk + 1, n_left - k, e_left - b.energy * k,
                weight * multiset(b.degeneracy, k), blk == 0 ? k : j0);
        }
    }
};

void compare(const ModeCatalog& c, size_t levels, int64_t n, int64_t e) {
    FluctuationSpec spec;
    spec.levels = levels;
    spec.n = n;
    spec.e = e;
    auto got = fluctuation_sum(c, spec);

    Brute br{&c, levels, std::vector<double>(size_t(n) + 1, 0.0)};
    br.rec(0, n, e, 1.0, 0);
    REQUIRE(br.norm > 0);

    double mean = 0, var = 0;
    for (size_t j = 0; j <= size_t(n); ++j) {
        double p = br.w[j] / br.norm;
        mean += double(j) * p;
        REQUIRE(got.w.size() > j);
        CHECK(got.w[j] == doctest::Approx(p).epsilon(1e-9));
    }
    for (size_t j = 0; j <= size_t(n); ++j)
        var += (double(j) - mean) * (double(j) - mean) * br.w[j] / br.norm;
    CHECK(got.mean == doctest::Approx(mean).epsilon(1e-9));
    CHECK(got.sigma == doctest::Approx(std::sqrt(var)).epsilon(1e-9));
}

}  // namespace

TEST_CASE("fluctuation sum matches exhaustive enumeration (box)") {
    ModeCatalog c = ModeCatalog::box(10);
    compare(c, 7, 6, 8);
    compare(c, 7, 10, 14);
    compare(c, 5, 4, 6);
}

TEST_CASE("fluctuation sum matches exhaustive enumeration (oscillator)") {
    ModeCatalog c = ModeCatalog::oscillator(10);
    compare(c, 6, 5, 9);
    compare(c, 8, 7, 12);
}

TEST_CASE("degenerate edge: all particles forced into the ground block") {
    ModeCatalog c = ModeCatalog::oscillator(6);
    FluctuationSpec spec;
    spec.levels = 5;
    spec.n = 4;
    spec.e = 0;
    auto r = fluctuation_sum(c, spec);
    CHECK(r.mean == doctest::Approx(4.0));
    CHECK(r.sigma == doctest::Approx(0.0));
    CHECK(r.w[4] == doctest::Approx(1.0));
}

TEST_CASE("unreachable energy is rejected") {
    ModeCatalog c = ModeCatalog::oscillator(4);
    FluctuationSpec spec;
    spec.levels = 3;  // energies 0,1,2: max reachable E = 2N
    spec.n = 2;
    spec.e = 100;
    CHECK_THROWS(fluctuation_sum(c, spec));
}
