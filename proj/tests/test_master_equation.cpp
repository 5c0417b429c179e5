#include <doctest.h>

#include <cmath>

#include "qbme/master_equation.hpp"

using namespace qbme;

TEST_CASE("box pair at E=2: three reachable configurations, uniform law") {
    ModeCatalog c = ModeCatalog::box(4);
    CollisionKernel k(c, PhysicsMode::BoxNonErgodic);
    OccupationState st(c, false);
    st.add_particles(uint32_t(c.mode_index(BoxMode{{1, 0, 0}})), 1);
    st.add_particles(uint32_t(c.mode_index(BoxMode{{-1, 0, 0}})), 1);
    auto r = exact_master_equation(k, st);
    REQUIRE(r.states.size() == 3);  // opposite pairs along x, y, z
    for (size_t i = 0; i < 3; ++i) {
        CHECK(r.stationary[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(r.multiplicity_log[i] == 0.0);  // mode representation
    }
}

TEST_CASE("ergodic oscillator pair: stationary law weights by multiplicity") {
    // B = (0,2,0): reachable class is {(0,2,0), (1,0,1)}.  Multiplicities:
    // C(2+3-1,2) = 6 for two particles in shell 1 (g=3), and 1 * C(6,1) = 6
    // for the split configuration -- equal, so the law is exactly 1/2, 1/2.
    ModeCatalog c = ModeCatalog::oscillator(2);
    CollisionKernel k(c, PhysicsMode::OscErgodic);
    OccupationState st(c, true);
    st.add_particles(1, 2);
    auto r = exact_master_equation(k, st);
    REQUIRE(r.states.size() == 2);
    CHECK(r.stationary[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.stationary[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(r.multiplicity_log[0] - r.multiplicity_log[1]) < 1e-12);
    CHECK(r.multiplicity_log[0] == doctest::Approx(std::log(6.0)).epsilon(1e-12));
}

TEST_CASE("stationary law is the lumped uniform law on a richer class") {
    ModeCatalog c = ModeCatalog::oscillator(6);
    CollisionKernel k(c, PhysicsMode::OscErgodic);
    OccupationState st(c, true);
    st.add_particles(0, 2);
    st.add_particles(3, 2);  // N=4, E=6
    auto r = exact_master_equation(k, st);
    REQUIRE(r.states.size() >= 5);
    double norm = 0;
    for (size_t i = 0; i < r.states.size(); ++i) norm += std::exp(r.multiplicity_log[i]);
    for (size_t i = 0; i < r.states.size(); ++i)
        CHECK(r.stationary[i] ==
              doctest::Approx(std::exp(r.multiplicity_log[i]) / norm).epsilon(1e-9));
}

TEST_CASE("class-size bound throws") {
    ModeCatalog c = ModeCatalog::box(30);
    CollisionKernel k(c, PhysicsMode::BoxErgodic);
    OccupationState st(c, true);
    st.add_particles(uint32_t(c.block_at_energy(1)), 10);
    st.add_particles(uint32_t(c.block_at_energy(4)), 5);
    CHECK_THROWS_AS(exact_master_equation(k, st, 10), std::length_error);
}
