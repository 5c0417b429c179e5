#include <doctest.h>

#include <cmath>

#include "qbme/config.hpp"
#include "qbme/engine.hpp"

using namespace qbme;

TEST_CASE("single particle: zero events, constant state") {
    ModeCatalog c = ModeCatalog::oscillator(10);
    TrajectoryConfig cfg;
    cfg.mode = PhysicsMode::OscErgodic;
    cfg.init.particles = 1;
    cfg.init.energy = 4;
    cfg.seed = 3;
    cfg.t_end = 1.0;
    auto rec = run_trajectory(c, cfg);
    CHECK(rec.events == 0);
    CHECK(rec.frozen);
    CHECK(rec.final_n == 1);
    CHECK(rec.final_e == 4);
}

TEST_CASE("frozen state is reported, not fatal") {
    // Two particles on the same momentum mode with no conserving split.
    ModeCatalog c = ModeCatalog::box(4);
    TrajectoryConfig cfg;
    cfg.mode = PhysicsMode::BoxNonErgodic;
    cfg.init.kind = InitSpec::Kind::Explicit;
    cfg.init.occupations = {{uint32_t(c.mode_index(BoxMode{{1, 0, 0}})), 2}};
    cfg.seed = 3;
    cfg.t_end = 2.0;
    cfg.sample_interval = 0.5;
    auto rec = run_trajectory(c, cfg);
    CHECK(rec.events == 0);
    CHECK(rec.frozen);
    CHECK(rec.t_final == doctest::Approx(2.0));
    CHECK(rec.samples.size() == 5);  // padded to t_end
}

TEST_CASE("determinism: same config and seed give identical records") {
    TrajectoryConfig cfg;
    cfg.mode = PhysicsMode::BoxErgodic;
    cfg.init.particles = 60;
    cfg.init.energy = 200;
    cfg.seed = 99;
    cfg.max_events = 5000;
    cfg.t_end = 1e9;
    ModeCatalog c1 = ModeCatalog::box(1), c2 = ModeCatalog::box(1);
    auto a = run_trajectory(c1, cfg);
    auto b = run_trajectory(c2, cfg);
    CHECK(a.events == b.events);
    CHECK(a.event_log_hash == b.event_log_hash);
    CHECK(a.final_occ == b.final_occ);
    CHECK(a.t_final == b.t_final);

    cfg.seed = 100;
    ModeCatalog c3 = ModeCatalog::box(1);
    auto d = run_trajectory(c3, cfg);
    CHECK(a.event_log_hash != d.event_log_hash);
}

TEST_CASE("init_from_spec hits the requested totals exactly") {
    for (PhysicsMode mode : {PhysicsMode::BoxNonErgodic, PhysicsMode::BoxErgodic,
                             PhysicsMode::OscErgodic}) {
        ModeCatalog c = geometry_of(mode) == Geometry::Box ? ModeCatalog::box(200)
                                                           : ModeCatalog::oscillator(200);
        Rng rng(5);
        InitSpec spec;
        spec.particles = 80;
        spec.energy = 150;
        OccupationState st = init_from_spec(c, is_ergodic(mode), spec, rng);
        CHECK(st.particles() == 80);
        CHECK(st.energy() == 150);
        int64_t n, e;
        std::array<int64_t, 3> p;
        st.recompute_totals(n, e, p);
        CHECK(n == 80);
        CHECK(e == 150);
    }
}

TEST_CASE("evaporation ramp: initial truncation and monotone cutoff") {
    EvaporationRamp ramp{65, 8, 0.5};
    CHECK(ramp.cutoff(0) == doctest::Approx(65.0));
    CHECK(ramp.cutoff(1e9) == doctest::Approx(8.0));
    CHECK(ramp.cutoff(1.0) < ramp.cutoff(0.5));

    ModeCatalog c = ModeCatalog::oscillator(40);
    TrajectoryConfig cfg;
    cfg.mode = PhysicsMode::OscErgodic;
    cfg.init.kind = InitSpec::Kind::Explicit;
    cfg.init.occupations = {{2, 3}, {30, 2}};  // two particles above the cut
    cfg.seed = 4;
    cfg.t_end = 0.5;
    cfg.ramp = EvaporationRamp{20, 5, 1.0};
    auto rec = run_evaporation(c, cfg);
    CHECK(rec.losses >= 2);  // t=0 truncation removes the shell-30 pair
    CHECK(rec.final_n <= 3);

    // A quasi-static cut far above every occupation loses nothing after t=0.
    cfg.ramp = EvaporationRamp{1000, 999, 1e-9};
    cfg.init.occupations = {{2, 3}, {5, 2}};
    auto quiet = run_evaporation(c, cfg);
    CHECK(quiet.losses == 0);

    // Evaporation requires an ergodic mode and a ramp.
    TrajectoryConfig bad = cfg;
    bad.ramp.reset();
    CHECK_THROWS_AS(run_evaporation(c, bad), std::invalid_argument);
}

TEST_CASE("waiting-time formula examples") {
    // R_tot = 2, r = e^-1  ->  dt = 0.5.
    CHECK(-std::log(std::exp(-1.0)) / 2.0 == doctest::Approx(0.5));

    // Empirical mean of dt * R_tot over 1e4 steps on a small box.
    ModeCatalog c = ModeCatalog::box(60);
    TrajectoryConfig cfg;
    cfg.mode = PhysicsMode::BoxNonErgodic;
    cfg.init.particles = 20;
    cfg.init.energy = 60;
    cfg.seed = 21;
    KmcEngine eng(c, cfg);
    double sum = 0;
    int n = 0;
    for (; n < 10000; ++n) {
        double r = eng.rates().total_rate();
        auto res = eng.step();
        if (!res.ok) break;
        sum += res.dt * r;
    }
    REQUIRE(n == 10000);
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.03));
}
