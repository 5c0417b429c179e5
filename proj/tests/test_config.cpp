#include <doctest.h>

#include "qbme/config.hpp"

using namespace qbme;

TEST_CASE("INI parsing with sections and comments") {
    RunPlan p = parse_config_text(
        "# experiment\n"
        "name = demo\n"
        "mode = osc-ergodic\n"
        "particles = 800\n"
        "t-over-tc = 1.4\n"
        "t-end = 40\n"
        "seed = 7\n"
        "trajectories = 3\n"
        "\n"
        "[ramp]\n"
        "e-b0 = 65\n"
        "e-l = 8\n"
        "gamma = 0.5\n");
    CHECK(p.name == "demo");
    CHECK(p.mode == PhysicsMode::OscErgodic);
    CHECK(p.particles == 800);
    CHECK(p.t_over_tc == doctest::Approx(1.4));
    CHECK(p.seed == 7);
    CHECK(p.trajectories == 3);
    REQUIRE(p.ramp.has_value());
    CHECK(p.ramp->e_b0 == 65);
    CHECK(p.ramp->gamma == doctest::Approx(0.5));
}

TEST_CASE("JSON parsing with nested ramp") {
    RunPlan p = parse_config_text(
        R"({"mode":"box-ergodic","particles":500,"energy":2000,"t-end":2.0,)"
        R"("ramp":null})");
    CHECK(p.mode == PhysicsMode::BoxErgodic);
    CHECK(p.particles == 500);
    CHECK(p.energy == 2000);
    CHECK(!p.ramp.has_value());
}

TEST_CASE("parse and validation errors") {
    // Unknown key.
    CHECK_THROWS_AS(parse_config_text("particles=5\nt-end=1\nbogus=1\n"), ConfigError);
    // Malformed line carries the line number.
    try {
        parse_config_text("particles=5\nnonsense\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    // Missing N.
    CHECK_THROWS_AS(parse_config_text("mode=box-ergodic\nenergy=10\nt-end=1\n"),
                    ConfigError);
    // Ramp with gamma <= 0.
    CHECK_THROWS_AS(parse_config_text("mode=osc-ergodic\nparticles=10\nenergy=50\n"
                                      "t-end=1\nramp.e-b0=20\nramp.e-l=5\nramp.gamma=0\n"),
                    ConfigError);
    // Ramp in a non-ergodic mode.
    CHECK_THROWS_AS(
        parse_config_text("mode=box-nonergodic\nparticles=10\nenergy=50\nt-end=1\n"
                          "ramp.e-b0=20\nramp.e-l=5\nramp.gamma=0.5\n"),
        ConfigError);
    // energy and t-over-tc are exclusive.
    CHECK_THROWS_AS(
        parse_config_text("mode=box-ergodic\nparticles=10\nenergy=50\nt-over-tc=0.5\nt-end=1\n"),
        ConfigError);
}

TEST_CASE("presets are valid and match their figure setups") {
    RunPlan fig1 = preset_plan("fig1-box-N500");
    CHECK(fig1.mode == PhysicsMode::BoxNonErgodic);
    CHECK(fig1.particles == 500);

    RunPlan fig13 = preset_plan("fig13-evap");
    CHECK(fig13.mode == PhysicsMode::OscErgodic);
    CHECK(fig13.particles == 800);
    REQUIRE(fig13.ramp.has_value());
    CHECK(fig13.ramp->e_b0 == 65);
    CHECK(fig13.ramp->e_l == 8);

    CHECK(preset_plan("fig10-osc-N300").particles == 300);
    CHECK(preset_plan("ergodization").mode == PhysicsMode::BoxNonErgodic);
    CHECK_THROWS_AS(preset_plan("fig99"), ConfigError);
}

TEST_CASE("resolved energy tracks the temperature target") {
    ModeCatalog c = ModeCatalog::box(1);
    RunPlan lo, hi;
    lo.particles = hi.particles = 100;
    lo.mode = hi.mode = PhysicsMode::BoxErgodic;
    lo.t_over_tc = 0.4;
    hi.t_over_tc = 1.2;
    int64_t e_lo = resolve_energy(c, lo);
    int64_t e_hi = resolve_energy(c, hi);
    CHECK(e_lo > 0);
    CHECK(e_hi > 2 * e_lo);

    RunPlan fixed;
    fixed.particles = 100;
    fixed.energy = 321;
    CHECK(resolve_energy(c, fixed) == 321);
}

TEST_CASE("canonical text is stable and distinguishes plans") {
    RunPlan a = preset_plan("fig7-fluct");
    RunPlan b = preset_plan("fig7-fluct");
    CHECK(canonical_text(a) == canonical_text(b));
    b.seed = 2;
    CHECK(canonical_text(a) != canonical_text(b));
}
