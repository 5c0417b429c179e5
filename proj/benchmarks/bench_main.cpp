#include <benchmark/benchmark.h>

#include "qbme/config.hpp"
#include "qbme/engine.hpp"

namespace {

using namespace qbme;

void BM_EnumerateChannels(benchmark::State& state) {
    PhysicsMode mode = state.range(0) == 0   ? PhysicsMode::BoxNonErgodic
                       : state.range(0) == 1 ? PhysicsMode::BoxErgodic
                                             : PhysicsMode::OscErgodic;
    ModeCatalog catalog = geometry_of(mode) == Geometry::Box ? ModeCatalog::box(300)
                                                             : ModeCatalog::oscillator(300);
    Rng rng(1);
    InitSpec spec;
    spec.particles = 200;
    spec.energy = 800;
    OccupationState st = init_from_spec(catalog, is_ergodic(mode), spec, rng);
    CollisionKernel kernel(catalog, mode);
    for (auto _ : state) {
        auto chans = kernel.enumerate_channels(st);
        benchmark::DoNotOptimize(chans.data());
    }
}
BENCHMARK(BM_EnumerateChannels)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_EngineStep(benchmark::State& state) {
    PhysicsMode mode = state.range(0) == 0   ? PhysicsMode::BoxNonErgodic
                       : state.range(0) == 1 ? PhysicsMode::BoxErgodic
                                             : PhysicsMode::OscErgodic;
    ModeCatalog catalog = geometry_of(mode) == Geometry::Box ? ModeCatalog::box(1)
                                                             : ModeCatalog::oscillator(1);
    TrajectoryConfig cfg;
    cfg.mode = mode;
    cfg.init.particles = 200;
    cfg.init.energy = 800;
    cfg.seed = 1;
    KmcEngine eng(catalog, cfg);
    for (auto _ : state) {
        if (!eng.step().ok) state.SkipWithError("frozen state");
    }
    state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(BM_EngineStep)->Arg(0)->Arg(1)->Arg(2);

void BM_RateRebuild(benchmark::State& state) {
    ModeCatalog catalog = ModeCatalog::box(1);
    TrajectoryConfig cfg;
    cfg.mode = PhysicsMode::BoxNonErgodic;
    cfg.init.particles = 300;
    cfg.init.energy = 1200;
    cfg.seed = 1;
    KmcEngine eng(catalog, cfg);
    for (int i = 0; i < 1000; ++i) eng.step();
    for (auto _ : state) eng.rates().rebuild(eng.state());
    state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(BM_RateRebuild)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
