#include <doctest.h>

#include <cmath>

#include "qbme/config.hpp"
#include "qbme/observables.hpp"

using namespace qbme;

TEST_CASE("time averager matches brute-force occupancy integration") {
    ModeCatalog c = ModeCatalog::oscillator(30);
    TrajectoryConfig cfg;
    cfg.mode = PhysicsMode::OscErgodic;
    cfg.init.particles = 15;
    cfg.init.energy = 40;
    cfg.seed = 31;
    cfg.t_end = 0;
    cfg.max_events = 3000;

    TimeAverager avg(0.0);
    std::vector<double> integral;
    double t_last = 0;
    auto hook = [&](double t, double dwell, const OccupationState& st,
                    const CollisionVector& cv) {
        avg.observe(t, dwell, st, cv);
        if (integral.empty()) integral.resize(st.site_count(), 0.0);
        for (uint32_t s = 0; s < st.site_count(); ++s)
            integral[s] += double(st.occupation(s)) * dwell;
        t_last = t;
    };
    double t_final_seen = 0;
    auto done = [&](const OccupationState& st, double t_final) {
        avg.finish(st, t_final);
        if (integral.empty()) integral.resize(st.site_count(), 0.0);
        for (uint32_t s = 0; s < st.site_count(); ++s)
            integral[s] += double(st.occupation(s)) * (t_final - t_last);
        t_final_seen = t_final;
    };
    auto rec = run_trajectory(c, cfg, hook, done);
    REQUIRE(rec.events == 3000);
    REQUIRE(avg.duration() == doctest::Approx(t_final_seen));
    const auto& mean = avg.mean();
    REQUIRE(mean.size() >= integral.size());
    double total = 0;
    for (size_t s = 0; s < integral.size(); ++s) {
        CHECK(mean[s] == doctest::Approx(integral[s] / t_final_seen).epsilon(1e-9));
        total += mean[s];
    }
    CHECK(total == doctest::Approx(15.0).epsilon(1e-9));
}

TEST_CASE("occupation histogram is time-normalized and matches the averager") {
    ModeCatalog c = ModeCatalog::oscillator(30);
    TrajectoryConfig cfg;
    cfg.mode = PhysicsMode::OscErgodic;
    cfg.init.particles = 10;
    cfg.init.energy = 25;
    cfg.seed = 32;
    cfg.max_events = 2000;
    cfg.t_end = 0;

    TimeAverager avg(0.0);
    OccupationHistogram hist(0, 0.0);
    auto hook = [&](double t, double dwell, const OccupationState& st,
                    const CollisionVector& cv) {
        avg.observe(t, dwell, st, cv);
        hist.observe(t, dwell, st, cv);
    };
    auto done = [&](const OccupationState& st, double tf) {
        avg.finish(st, tf);
        hist.finish(st, tf);
    };
    run_trajectory(c, cfg, hook, done);
    auto w = hist.normalized();
    double norm = 0, mean = 0;
    for (size_t j = 0; j < w.size(); ++j) {
        norm += w[j];
        mean += double(j) * w[j];
    }
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean == doctest::Approx(avg.mean()[0]).epsilon(1e-9));
}

TEST_CASE("condensate sigma of a geometric pmf") {
    // Geometric with mean m has variance m(1+m).
    std::vector<double> pmf;
    double eta = 0.5;
    for (int k = 0; k < 200; ++k) pmf.push_back((1 - eta) * std::pow(eta, k));
    auto s = condensate_sigma(pmf);
    CHECK(s.mean == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.sigma == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(s.error > 0);
}

TEST_CASE("collision time bookkeeping") {
    auto s = collision_time(10.0, 1000, 100.0);
    CHECK(s.mean_dt == doctest::Approx(0.01));
    CHECK(s.t_coll == doctest::Approx(50.0 * 0.01));
}

TEST_CASE("growth fit recovers a synthetic exponential") {
    std::vector<double> t, nc;
    for (int i = 0; i <= 300; ++i) {
        double x = 0.01 * i;
        t.push_back(x);
        nc.push_back(250.0 * (1.0 - std::exp(-x / 0.37)));
    }
    auto fit = growth_fit(t, nc);
    CHECK(!fit.degenerate);
    CHECK(fit.n_eq == doctest::Approx(250.0).epsilon(1e-6));
    CHECK(fit.tau == doctest::Approx(0.37).epsilon(1e-6));
    CHECK(fit.residual < 1e-6);

    // Flat data is reported as degenerate rather than fit.
    std::vector<double> flat(t.size(), 0.0);
    CHECK(growth_fit(t, flat).degenerate);
}

TEST_CASE("ergodization distortion preserves all conserved quantities") {
    ModeCatalog c = ModeCatalog::box(30);
    Rng rng(17);
    InitSpec spec;
    spec.particles = 200;
    spec.energy = 500;
    OccupationState st = init_from_spec(c, false, spec, rng);
    auto p0 = st.momentum();
    int64_t moved = ergodization_distort(st);
    CHECK(moved > 0);
    CHECK(st.particles() == 200);
    CHECK(st.energy() == 500);
    CHECK(st.momentum() == p0);
    // The +/-x pair now holds every shell-1 pair that was moved.
    const auto& blk = c.block(size_t(c.block_at_energy(1)));
    int64_t on_x = st.occupation(uint32_t(c.mode_index(BoxMode{{1, 0, 0}}))) +
                   st.occupation(uint32_t(c.mode_index(BoxMode{{-1, 0, 0}})));
    int64_t shell = 0;
    for (int64_t i = 0; i < blk.degeneracy; ++i)
        shell += st.occupation(blk.first_mode + uint32_t(i));
    CHECK(on_x >= moved);
    CHECK(shell >= on_x);
}

TEST_CASE("collision-move distortion conserves invariants and fills the pair") {
    ModeCatalog c = ModeCatalog::box(80);
    CollisionKernel kernel(c, PhysicsMode::BoxNonErgodic);
    Rng rng(23);
    InitSpec spec;
    spec.particles = 200;
    spec.energy = 500;
    OccupationState st = init_from_spec(c, false, spec, rng);
    auto p0 = st.momentum();
    uint32_t xp = uint32_t(c.mode_index(BoxMode{{1, 0, 0}}));
    uint32_t xm = uint32_t(c.mode_index(BoxMode{{-1, 0, 0}}));
    int64_t pair0 = st.occupation(xp) + st.occupation(xm);
    int64_t moved = collision_distort(st, kernel, 40);
    CHECK(moved >= 40);
    CHECK(st.particles() == 200);
    CHECK(st.energy() == 500);
    CHECK(st.momentum() == p0);
    // Every counted move lands one more particle on the +/-x pair.
    CHECK(st.occupation(xp) + st.occupation(xm) == pair0 + moved);

    // Ergodic states are rejected: the probe needs mode-resolved occupations.
    OccupationState erg(c, true);
    CollisionKernel ek(c, PhysicsMode::BoxErgodic);
    CHECK_THROWS_AS(collision_distort(erg, ek, 2), std::invalid_argument);
}

TEST_CASE("block means and profile distance") {
    ModeCatalog c = ModeCatalog::box(6);
    std::vector<double> site_mean(size_t(c.mode_count()), 0.0);
    const auto& b1 = c.block(size_t(c.block_at_energy(1)));
    for (int64_t i = 0; i < b1.degeneracy; ++i) site_mean[b1.first_mode + size_t(i)] = 0.5;
    site_mean[0] = 2.0;
    auto bm = block_means(c, false, site_mean);
    CHECK(bm[0] == doctest::Approx(2.0));
    CHECK(bm[size_t(c.block_at_energy(1))] == doctest::Approx(3.0));

    CHECK(profile_distance(bm, bm) == doctest::Approx(0.0));
    auto worse = bm;
    worse[0] += 1.0;
    CHECK(profile_distance(worse, bm) > 0.0);
}
