#include <doctest.h>

#include <cmath>

#include "qbme/rng.hpp"
#include "qbme/stats.hpp"

using namespace qbme;

TEST_CASE("regularized gamma Q reference values") {
    CHECK(regularized_gamma_q(1.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(regularized_gamma_q(0.5, 1.0) == doctest::Approx(std::erfc(1.0)).epsilon(1e-10));
    CHECK(regularized_gamma_q(3.0, 0.0) == doctest::Approx(1.0));
    // Q(a, x) for chi2: p-value of chi2=dof is moderate.
    CHECK(chi2_p_value(2.0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("KS statistic and p-value behave sanely") {
    // Perfectly placed quantiles of Exp(1) give a small statistic.
    std::vector<double> good;
    const int n = 1000;
    for (int i = 0; i < n; ++i) good.push_back(-std::log(1.0 - (i + 0.5) / n));
    double d = ks_statistic_exponential(good, 1.0);
    CHECK(d < 0.001);
    CHECK(ks_p_value(d, good.size()) > 0.99);

    // Wrong rate is rejected decisively.
    double dbad = ks_statistic_exponential(good, 3.0);
    CHECK(ks_p_value(dbad, good.size()) < 1e-6);

    // Actual exponential draws pass at alpha = 0.01.
    Rng rng(123);
    std::vector<double> draws;
    for (int i = 0; i < 5000; ++i) draws.push_back(-std::log(rng.unit_open0()) / 2.5);
    double de = ks_statistic_exponential(draws, 2.5);
    CHECK(ks_p_value(de, draws.size()) > 0.01);
}

TEST_CASE("chi-square statistic and zero-expectation rule") {
    std::vector<double> obs{12, 8, 10};
    std::vector<double> exp{10, 10, 10};
    CHECK(chi2_statistic(obs, exp) == doctest::Approx(0.4 + 0.4 + 0.0));
    CHECK(chi2_statistic({0, 10}, {0, 10}) == doctest::Approx(0.0));
    CHECK_THROWS(chi2_statistic({1, 9}, {0, 10}));
    CHECK(chi2_p_value(0.0, 5) == doctest::Approx(1.0));
    CHECK(chi2_p_value(100.0, 5) < 1e-10);
}

TEST_CASE("total variation distance") {
    CHECK(total_variation({0.5, 0.5}, {0.5, 0.5}) == doctest::Approx(0.0));
    CHECK(total_variation({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(1.0));
    CHECK(total_variation({0.6, 0.4}, {0.5, 0.5}) == doctest::Approx(0.1));
}

TEST_CASE("rng basics") {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        double u = rng.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        double v = rng.unit_open0();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
        uint64_t k = rng.below(7);
        CHECK(k < 7);
    }
    // Stream seeds differ and are deterministic.
    CHECK(Rng::stream_seed(1, 0) != Rng::stream_seed(1, 1));
    CHECK(Rng::stream_seed(1, 5) == Rng::stream_seed(1, 5));
}
