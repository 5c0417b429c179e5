#include "qbme/engine.hpp"

#include <cmath>
#include <stdexcept>

namespace qbme {

double EvaporationRamp::cutoff(double t) const {
    return double(e_b0 - e_l) * std::exp(-gamma * t) + double(e_l);
}

KmcEngine::KmcEngine(ModeCatalog& catalog, const TrajectoryConfig& cfg)
    : catalog_(&catalog),
      cfg_(cfg),
      rng_(cfg.seed),
      state_(init_from_spec(catalog, is_ergodic(cfg.mode), cfg.init, rng_)),
      kernel_(catalog, cfg.mode),
      rates_(kernel_) {
    // Any collision pair carries at most the total energy; extending the
    // catalog up front keeps it immutable for the rest of the run.
    catalog.ensure_energy(state_.energy());
    rates_.build(state_);
    if (cfg_.ramp) {
        // The cut applies to a gas in thermal equilibrium, so relax the
        // sampled initial state with the ramp off, then truncate at E_b(0)
        // and restart the clock.
        for (uint64_t k = 0; k < cfg_.ramp_equil_events; ++k)
            if (!step().ok) break;
        double eb0 = cfg_.ramp->cutoff(0.0);
        for (uint32_t s = 0; s < state_.site_count(); ++s) {
            int64_t n = state_.occupation(s);
            if (n > 0 && double(state_.site_energy(s)) > eb0) {
                state_.add_particles(s, -n);
                losses_ += uint64_t(n);
            }
        }
        rates_.rebuild(state_);
        t_ = 0;
        events_ = 0;
    }
}

StepResult KmcEngine::step() {
    double total = rates_.total_rate();
    if (total <= 0) return {};
    StepResult res;
    res.ok = true;
    res.dt = -std::log(rng_.unit_open0()) / total;
    res.cv = rates_.sample(rng_.unit() * total);
    t_ += res.dt;
    state_.apply(res.cv);
    rates_.on_event(state_, res.cv);
    ++events_;
    if (cfg_.rebuild_period && events_ % cfg_.rebuild_period == 0) rates_.rebuild(state_);
    return res;
}

int KmcEngine::apply_ramp_losses(const CollisionVector& cv, double t) {
    if (!cfg_.ramp) return 0;
    double eb = cfg_.ramp->cutoff(t);
    int lost = 0;
    for (uint32_t site : {cv.c, cv.d}) {
        if (state_.occupation(site) > 0 && double(state_.site_energy(site)) > eb) {
            state_.remove_particle(site);
            rates_.on_loss(state_, site);
            ++lost;
        }
    }
    losses_ += uint64_t(lost);
    return lost;
}

namespace {

inline void fnv_mix(uint64_t& h, uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
    }
}

}  // namespace

TrajectoryRecord run_trajectory(ModeCatalog& catalog, const TrajectoryConfig& cfg,
                                const EventHook& hook, const FinishHook& done) {
    KmcEngine eng(catalog, cfg);
    TrajectoryRecord rec;
    uint64_t hash = 14695981039346656037ull;

    const bool sampling = cfg.sample_interval > 0;
    double next_sample = 0;
    auto emit_until = [&](double tcap) {
        if (!sampling) return;
        const OccupationState& st = eng.state();
        while (next_sample <= tcap) {
            SamplePoint p;
            p.t = next_sample;
            p.n = st.particles();
            p.e = st.energy();
            p.n0 = st.occupation(0);
            if (cfg.series_blocks > 0) {
                size_t nb = std::min(cfg.series_blocks, catalog.block_count());
                p.block_occ.resize(nb, 0);
                for (size_t b = 0; b < nb; ++b) {
                    if (st.ergodic()) {
                        p.block_occ[b] = st.occupation(uint32_t(b));
                    } else {
                        const auto& blk = catalog.block(b);
                        for (int64_t i = 0; i < blk.degeneracy; ++i)
                            p.block_occ[b] += st.occupation(blk.first_mode + uint32_t(i));
                    }
                }
            }
            rec.samples.push_back(std::move(p));
            next_sample += cfg.sample_interval;
        }
    };

    bool ended_early = false;
    for (;;) {
        double total = eng.rates_.total_rate();
        if (total <= 0) {
            ended_early = true;
            break;
        }
        double dt = -std::log(eng.rng_.unit_open0()) / total;
        double t_ev = eng.t_ + dt;
        bool past_end = cfg.t_end > 0 && t_ev > cfg.t_end;
        emit_until(past_end ? cfg.t_end : t_ev);
        if (past_end) {
            eng.t_ = cfg.t_end;
            break;
        }
        const CollisionVector cv = eng.rates_.sample(eng.rng_.unit() * total);
        if (hook) hook(t_ev, dt, eng.state_, cv);
        eng.t_ = t_ev;
        eng.state_.apply(cv);
        eng.rates_.on_event(eng.state_, cv);
        ++eng.events_;
        fnv_mix(hash, (uint64_t(cv.a) << 32) | cv.b);
        fnv_mix(hash, (uint64_t(cv.c) << 32) | cv.d);
        uint64_t tbits;
        static_assert(sizeof(tbits) == sizeof(t_ev));
        __builtin_memcpy(&tbits, &t_ev, sizeof(tbits));
        fnv_mix(hash, tbits);
        if (cfg.record_event_times) rec.event_times.push_back(t_ev);
        if (cfg.ramp) {
            eng.apply_ramp_losses(cv, t_ev);
            if (eng.state_.particles() <= 1) {
                ended_early = true;
                break;
            }
        }
        if (cfg.rebuild_period && eng.events_ % cfg.rebuild_period == 0)
            eng.rates_.rebuild(eng.state_);
        if (cfg.max_events && eng.events_ >= cfg.max_events) break;
    }

    if (ended_early) {
        // Frozen or emptied before t_end: the state is constant from here on.
        rec.frozen = cfg.t_end <= 0 || eng.t_ < cfg.t_end;
        if (cfg.t_end > 0) {
            emit_until(cfg.t_end);
            eng.t_ = cfg.t_end;
        }
    }

    if (done) done(eng.state_, eng.t_);
    rec.events = eng.events_;
    rec.losses = eng.losses_;
    rec.t_final = eng.t_;
    rec.event_log_hash = hash;
    rec.final_n = eng.state_.particles();
    rec.final_e = eng.state_.energy();
    rec.final_occ.resize(eng.state_.site_count());
    for (uint32_t s = 0; s < rec.final_occ.size(); ++s)
        rec.final_occ[s] = eng.state_.occupation(s);
    return rec;
}

TrajectoryRecord run_evaporation(ModeCatalog& catalog, const TrajectoryConfig& cfg,
                                 const EventHook& hook, const FinishHook& done) {
    if (!cfg.ramp) throw std::invalid_argument("evaporation run needs a ramp");
    if (!is_ergodic(cfg.mode))
        throw std::invalid_argument("evaporation runs use an ergodic physics mode");
    return run_trajectory(catalog, cfg, hook, done);
}

}  // namespace qbme
