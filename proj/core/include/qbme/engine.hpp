#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qbme/rate_catalog.hpp"

namespace qbme {

/// E_b(t) = (E_b0 - E_l) exp(-gamma t) + E_l, monotone toward E_l.
struct EvaporationRamp {
    int64_t e_b0 = 0;
    int64_t e_l = 0;
    double gamma = 0;

    double cutoff(double t) const;
};

struct TrajectoryConfig {
    PhysicsMode mode = PhysicsMode::BoxNonErgodic;
    InitSpec init;
    uint64_t seed = 0;
    double t_end = 0;
    double sample_interval = 0;   ///< 0: no sampled series
    uint64_t max_events = 0;      ///< 0: no event cap
    uint64_t rebuild_period = 100000;
    size_t series_blocks = 0;     ///< per-block occupations carried in samples
    bool record_event_times = false;
    std::optional<EvaporationRamp> ramp;
    /// Ramp runs start from thermal equilibrium: the sampled initial state is
    /// relaxed for this many events with the ramp off before the t = 0
    /// truncation at E_b(0).
    uint64_t ramp_equil_events = 20000;
};

struct SamplePoint {
    double t = 0;
    int64_t n = 0;
    int64_t e = 0;
    int64_t n0 = 0;
    std::vector<int64_t> block_occ;
};

struct TrajectoryRecord {
    uint64_t events = 0;
    uint64_t losses = 0;
    double t_final = 0;
    bool frozen = false;
    uint64_t event_log_hash = 0;
    std::vector<SamplePoint> samples;
    std::vector<double> event_times;
    std::vector<int64_t> final_occ;
    int64_t final_n = 0;
    int64_t final_e = 0;
};

/// Called once per event, after channel selection but before the collision is
/// applied: `st` is the pre-event state, held for `dwell` before time t.
using EventHook = std::function<void(double t, double dwell, const OccupationState& st,
                                     const CollisionVector& cv)>;

/// Called once after the loop with the final state and final time.
using FinishHook = std::function<void(const OccupationState& st, double t_final)>;

struct StepResult {
    bool ok = false;  ///< false: frozen state (total rate zero)
    CollisionVector cv;
    double dt = 0;
};

/// One sequential stochastic trajectory: state, rates, clock, RNG.
class KmcEngine {
  public:
    KmcEngine(ModeCatalog& catalog, const TrajectoryConfig& cfg);

    /// Draw the waiting time, select a channel by roulette, apply it, and
    /// update rates incrementally.  Does not handle evaporation losses.
    StepResult step();

    /// Remove post-collision participants scattered above the ramp cutoff at
    /// time t.  Returns the number of particles lost.
    int apply_ramp_losses(const CollisionVector& cv, double t);

    const OccupationState& state() const { return state_; }
    OccupationState& state() { return state_; }
    const RateCatalog& rates() const { return rates_; }
    RateCatalog& rates() { return rates_; }
    Rng& rng() { return rng_; }
    double time() const { return t_; }
    uint64_t events() const { return events_; }

  private:
    friend TrajectoryRecord run_trajectory(ModeCatalog&, const TrajectoryConfig&,
                                           const EventHook&, const FinishHook&);

    ModeCatalog* catalog_;
    TrajectoryConfig cfg_;
    Rng rng_;
    OccupationState state_;
    CollisionKernel kernel_;
    RateCatalog rates_;
    double t_ = 0;
    uint64_t events_ = 0;
    uint64_t losses_ = 0;
};

TrajectoryRecord run_trajectory(ModeCatalog& catalog, const TrajectoryConfig& cfg,
                                const EventHook& hook = {}, const FinishHook& done = {});

/// run_trajectory with a mandatory ramp (throws std::invalid_argument if absent).
TrajectoryRecord run_evaporation(ModeCatalog& catalog, const TrajectoryConfig& cfg,
                                 const EventHook& hook = {}, const FinishHook& done = {});

}  // namespace qbme
