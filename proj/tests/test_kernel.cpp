#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qbme/kernel.hpp"

using namespace qbme;

namespace {

uint32_t box_idx(const ModeCatalog& c, int x, int y, int z) {
    int64_t i = c.mode_index(BoxMode{{x, y, z}});
    REQUIRE(i >= 0);
    return uint32_t(i);
}

}  // namespace

TEST_CASE("state apply/revert and conservation") {
    ModeCatalog c = ModeCatalog::box(4);
    OccupationState st(c, false);
    st.add_particles(box_idx(c, 1, 0, 0), 1);
    st.add_particles(box_idx(c, -1, 0, 0), 1);
    CHECK(st.particles() == 2);
    CHECK(st.energy() == 2);
    CHECK(st.momentum() == std::array<int64_t, 3>{0, 0, 0});

    CollisionVector cv{box_idx(c, 1, 0, 0), box_idx(c, -1, 0, 0), box_idx(c, 0, 1, 0),
                       box_idx(c, 0, -1, 0)};
    OccupationState before = st;
    st.apply(cv);
    CHECK(st.particles() == 2);
    CHECK(st.energy() == 2);
    CHECK(st.momentum() == std::array<int64_t, 3>{0, 0, 0});
    CHECK(st.occupation(box_idx(c, 0, 1, 0)) == 1);
    st.revert(cv);
    for (uint32_t s = 0; s < st.site_count(); ++s)
        CHECK(st.occupation(s) == before.occupation(s));

    // Energy-violating collision is rejected by the state's exact check.
    CollisionVector bad{box_idx(c, 1, 0, 0), box_idx(c, -1, 0, 0), box_idx(c, 0, 1, 0),
                        box_idx(c, 0, 2, 0)};
    CHECK_THROWS_AS(st.apply(bad), std::logic_error);
}

TEST_CASE("ergodic oscillator shell arithmetic example") {
    ModeCatalog c = ModeCatalog::oscillator(4);
    OccupationState st(c, true);
    st.add_particles(1, 2);  // B = (0,2,0,...)
    CollisionVector cv{1, 1, 0, 2};
    st.apply(cv);
    CHECK(st.occupation(0) == 1);
    CHECK(st.occupation(1) == 0);
    CHECK(st.occupation(2) == 1);
    CHECK(st.energy() == 2);
    CHECK(st.particles() == 2);
}

TEST_CASE("structural factors: identity, conservation, impossibility") {
    ModeCatalog c = ModeCatalog::box(4);
    CollisionKernel k(c, PhysicsMode::BoxNonErgodic);
    uint32_t g = box_idx(c, 0, 0, 0);
    // 0+0 -> k + (-k) violates energy conservation for any e_k > 0.
    CHECK(k.structural_factor({g, g, box_idx(c, 1, 0, 0), box_idx(c, -1, 0, 0)}) == 0.0);
    // Identity channel.
    CHECK(k.structural_factor({g, box_idx(c, 1, 0, 0), g, box_idx(c, 1, 0, 0)}) == 0.0);
    // Momentum violation.
    CHECK(k.structural_factor({box_idx(c, 1, 0, 0), box_idx(c, -1, 0, 0),
                               box_idx(c, 0, 1, 0), box_idx(c, 0, 1, 0)}) == 0.0);
    // Allowed channel carries 1/pi (distinct modes on both sides).
    double s = k.structural_factor({box_idx(c, 1, 0, 0), box_idx(c, -1, 0, 0),
                                    box_idx(c, 0, 1, 0), box_idx(c, 0, -1, 0)});
    CHECK(s == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("box momentum-tuple count for shells (1,1 -> 0,2) is 24") {
    ModeCatalog c = ModeCatalog::box(4);
    CollisionKernel k(c, PhysicsMode::BoxErgodic);
    CHECK(k.box_tuple_count(1, 1, 0, 2) == 24.0);
    CHECK(k.box_tuple_count(0, 2, 1, 1) == 24.0);  // time reversal
    CHECK(k.box_tuple_count(1, 1, 2, 0) == 24.0);  // pair order
    CHECK(k.box_tuple_count(1, 1, 0, 3) == 0.0);   // energy not conserved
}

TEST_CASE("box tuple count oracle: direct enumeration for a few shell tuples") {
    ModeCatalog c = ModeCatalog::box(12);
    CollisionKernel k(c, PhysicsMode::BoxErgodic);
    for (auto [e1, e2, e3, e4] : {std::array<int64_t, 4>{1, 4, 2, 3},
                                  std::array<int64_t, 4>{2, 2, 1, 3},
                                  std::array<int64_t, 4>{4, 4, 3, 5},
                                  std::array<int64_t, 4>{1, 9, 4, 6}}) {
        double brute = 0;
        for (uint32_t i = 0; i < c.mode_count(); ++i) {
            if (c.mode(i).energy() != e1) continue;
            for (uint32_t j = 0; j < c.mode_count(); ++j) {
                if (c.mode(j).energy() != e2) continue;
                for (uint32_t l = 0; l < c.mode_count(); ++l) {
                    if (c.mode(l).energy() != e3) continue;
                    BoxMode m4{{c.mode(i).m[0] + c.mode(j).m[0] - c.mode(l).m[0],
                                c.mode(i).m[1] + c.mode(j).m[1] - c.mode(l).m[1],
                                c.mode(i).m[2] + c.mode(j).m[2] - c.mode(l).m[2]}};
                    if (m4.energy() == e4) brute += 1;
                }
            }
        }
        CHECK(k.box_tuple_count(e1, e2, e3, e4) == brute);
    }
}

TEST_CASE("ergodic box structural symmetries") {
    ModeCatalog c = ModeCatalog::box(8);
    CollisionKernel k(c, PhysicsMode::BoxErgodic);
    auto blk = [&](int64_t e) { return uint32_t(c.block_at_energy(e)); };
    double s = k.structural_factor({blk(1), blk(4), blk(2), blk(3)});
    CHECK(s > 0);
    CHECK(k.structural_factor({blk(4), blk(1), blk(3), blk(2)}) ==
          doctest::Approx(s).epsilon(1e-14));
    CHECK(k.structural_factor({blk(2), blk(3), blk(1), blk(4)}) ==
          doctest::Approx(s).epsilon(1e-14));
}

TEST_CASE("oscillator ergodic structural factor uses g_min") {
    ModeCatalog c = ModeCatalog::oscillator(10);
    CollisionKernel k(c, PhysicsMode::OscErgodic);
    // jmin = 1 -> g = 3; distinct blocks on both sides -> sym = 1.
    CHECK(k.structural_factor({2, 3, 1, 4}) == doctest::Approx(0.25 * 3.0));
    // Same-block pair halves once.
    CHECK(k.structural_factor({2, 2, 1, 3}) == doctest::Approx(0.5 * 0.25 * 3.0));
}

TEST_CASE("cross-mode consistency: lumped rate equals summed mode rates") {
    // Shell-uniform occupations on two distinct shells; for a channel whose
    // four blocks are pairwise distinct the ergodic rate must equal the sum of
    // the mode-resolved rates with the same block signature exactly.
    ModeCatalog c = ModeCatalog::box(8);
    CollisionKernel kn(c, PhysicsMode::BoxNonErgodic);
    CollisionKernel ke(c, PhysicsMode::BoxErgodic);

    OccupationState stn(c, false);
    for (int64_t e : {1, 4}) {
        const auto& b = c.block(size_t(c.block_at_energy(e)));
        for (int64_t i = 0; i < b.degeneracy; ++i)
            stn.add_particles(b.first_mode + uint32_t(i), 1);
    }
    OccupationState ste(c, true);
    ste.add_particles(uint32_t(c.block_at_energy(1)), 6);
    ste.add_particles(uint32_t(c.block_at_energy(4)), 6);

    auto blk = [&](int64_t e) { return uint32_t(c.block_at_energy(e)); };
    CollisionVector target{blk(1), blk(4), blk(2), blk(3)};
    double lumped = ke.rate(ste, target);

    double summed = 0;
    for (const auto& ch : kn.enumerate_channels(stn)) {
        auto sig = [&](uint32_t m) { return c.block(c.block_of_mode(m)).energy; };
        int64_t s1 = std::min(sig(ch.cv.a), sig(ch.cv.b));
        int64_t s2 = std::max(sig(ch.cv.a), sig(ch.cv.b));
        int64_t s3 = std::min(sig(ch.cv.c), sig(ch.cv.d));
        int64_t s4 = std::max(sig(ch.cv.c), sig(ch.cv.d));
        if (s1 == 1 && s2 == 4 && s3 == 2 && s4 == 3) summed += ch.rate;
    }
    CHECK(lumped > 0);
    CHECK(summed == doctest::Approx(lumped).epsilon(1e-12));
}

TEST_CASE("kernel reversibility: forward and reversed rates from related states") {
    // For every channel, P(state -> state') with cv equals P(state' -> state)
    // with the reversed cv evaluated in the post-collision state, up to the
    // stationary-weight ratio -- in the mode representation the weights are
    // equal, so the rates must coincide exactly.
    ModeCatalog c = ModeCatalog::box(6);
    CollisionKernel k(c, PhysicsMode::BoxNonErgodic);
    OccupationState st(c, false);
    auto idx = [&](int x, int y, int z) { return box_idx(c, x, y, z); };
    st.add_particles(idx(0, 0, 0), 2);
    st.add_particles(idx(1, 0, 0), 2);
    st.add_particles(idx(-1, 0, 0), 1);
    st.add_particles(idx(1, 1, 0), 1);
    for (const auto& ch : k.enumerate_channels(st)) {
        OccupationState after = st;
        after.apply(ch.cv);
        double back = k.rate(after, ch.cv.reversed());
        CHECK(back == doctest::Approx(ch.rate).epsilon(1e-12));
    }
}

TEST_CASE("ergodic reversibility against the multiset stationary weight") {
    // Ergodic weights are multiset counts prod C(B+g-1, B); detailed balance:
    // w(n) P(n->n') = w(n') P(n'->n).
    ModeCatalog c = ModeCatalog::oscillator(6);
    CollisionKernel k(c, PhysicsMode::OscErgodic);
    OccupationState st(c, true);
    st.add_particles(0, 1);
    st.add_particles(1, 2);
    st.add_particles(3, 1);
    auto logw = [&](const OccupationState& s) {
        double lw = 0;
        for (uint32_t b = 0; b < s.site_count(); ++b) {
            double B = double(s.occupation(b)), g = double(s.site_degeneracy(b));
            lw += std::lgamma(B + g) - std::lgamma(B + 1) - std::lgamma(g);
        }
        return lw;
    };
    for (const auto& ch : k.enumerate_channels(st)) {
        OccupationState after = st;
        after.apply(ch.cv);
        double back = k.rate(after, ch.cv.reversed());
        REQUIRE(back > 0);
        double lhs = logw(st) + std::log(ch.rate);
        double rhs = logw(after) + std::log(back);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("enumerate_channels lists exactly the possible collisions") {
    ModeCatalog c = ModeCatalog::oscillator(8);
    CollisionKernel k(c, PhysicsMode::OscErgodic);
    OccupationState st(c, true);
    st.add_particles(1, 2);
    st.add_particles(2, 1);
    auto chans = k.enumerate_channels(st);
    for (const auto& ch : chans) {
        CHECK(ch.rate > 0);
        CHECK(ch.rate ==
              doctest::Approx(ch.structural * k.occupation_factor(st, ch.cv)));
        // No identity channels.
        CHECK(!(ch.cv.a == ch.cv.c && ch.cv.b == ch.cv.d));
    }
    // N=1: nothing can collide.
    OccupationState lone(c, true);
    lone.add_particles(3, 1);
    CHECK(k.enumerate_channels(lone).empty());
}
