#include <doctest.h>

#include <map>

#include "qbme/catalog.hpp"

using namespace qbme;

namespace {

// Independent oracle: count integer 3-vectors with |m|^2 = e by brute force.
int64_t lattice_shell_count(int64_t e) {
    int64_t r = 0;
    int lim = 0;
    while (int64_t(lim) * lim <= e) ++lim;
    for (int x = -lim; x <= lim; ++x)
        for (int y = -lim; y <= lim; ++y)
            for (int z = -lim; z <= lim; ++z)
                if (int64_t(x) * x + int64_t(y) * y + int64_t(z) * z == e) ++r;
    return r;
}

}  // namespace

TEST_CASE("box catalog trivial and small shells") {
    ModeCatalog c = ModeCatalog::box(0);
    CHECK(c.block_count() == 1);
    CHECK(c.block(0).degeneracy == 1);
    CHECK(c.mode(0).m == std::array<int, 3>{0, 0, 0});

    c.ensure_energy(9);
    CHECK(c.block(size_t(c.block_at_energy(1))).degeneracy == 6);
    CHECK(c.block(size_t(c.block_at_energy(9))).degeneracy == 30);
}

TEST_CASE("box shell degeneracies match the lattice oracle up to e=40") {
    ModeCatalog c = ModeCatalog::box(40);
    int64_t states = 0;
    for (int64_t e = 0; e <= 40; ++e) {
        int64_t g = lattice_shell_count(e);
        int b = c.block_at_energy(e);
        if (g == 0) {
            CHECK(b == -1);
        } else {
            REQUIRE(b >= 0);
            CHECK(c.block(size_t(b)).energy == e);
            CHECK(c.block(size_t(b)).degeneracy == g);
        }
        states += g;
    }
    CHECK(c.state_count() == states);
}

TEST_CASE("box energies of the form 4^a(8b+7) have no states") {
    ModeCatalog c = ModeCatalog::box(120);
    for (int64_t e : {7, 15, 23, 28, 60, 92, 112}) CHECK(c.block_at_energy(e) == -1);
    for (int64_t e : {100, 101, 102, 104, 110}) CHECK(c.block_at_energy(e) >= 0);
}

TEST_CASE("oscillator degeneracies and cumulative count") {
    ModeCatalog c = ModeCatalog::oscillator(50);
    CHECK(c.block_count() == 51);
    int64_t cum = 0;
    for (int64_t j = 0; j <= 50; ++j) {
        CHECK(c.block(size_t(j)).energy == j);
        CHECK(c.block(size_t(j)).degeneracy == (j + 1) * (j + 2) / 2);
        cum += c.block(size_t(j)).degeneracy;
        CHECK(cum == (j + 1) * (j + 2) * (j + 3) / 6);
    }
    CHECK(c.block(10).degeneracy == 66);
}

TEST_CASE("catalog extension is append-only and order-independent") {
    ModeCatalog a = ModeCatalog::box(25);
    ModeCatalog b = ModeCatalog::box(2);
    b.ensure_energy(11);
    b.ensure_energy(25);
    REQUIRE(a.mode_count() == b.mode_count());
    for (uint32_t i = 0; i < a.mode_count(); ++i) {
        CHECK(a.mode(i).m == b.mode(i).m);
        CHECK(a.block_of_mode(i) == b.block_of_mode(i));
    }
    for (uint32_t i = 0; i < a.mode_count(); ++i)
        CHECK(a.mode_index(a.mode(i)) == int64_t(i));
}

TEST_CASE("catalog capacity bound") {
    CHECK_THROWS_AS(ModeCatalog::box(400, 1000), CapacityError);
}
