#include "qbme/runner.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "qbme/equilibrium.hpp"
#include "qbme/fluctuations.hpp"

namespace qbme {

namespace {

namespace fs = std::filesystem;

ModeCatalog make_catalog(Geometry g) {
    return g == Geometry::Box ? ModeCatalog::box(1) : ModeCatalog::oscillator(1);
}

uint64_t fnv_string(const std::string& s) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

TrajectoryConfig trajectory_config(const RunPlan& plan, int64_t energy, int index) {
    TrajectoryConfig cfg;
    cfg.mode = plan.mode;
    cfg.init.kind = plan.init;
    cfg.init.particles = plan.particles;
    cfg.init.energy = energy;
    cfg.seed = Rng::stream_seed(plan.seed, uint64_t(index));
    cfg.t_end = plan.t_end;
    cfg.sample_interval = plan.sample_interval;
    cfg.max_events = plan.max_events;
    cfg.rebuild_period = plan.rebuild_period;
    cfg.series_blocks = plan.series_blocks;
    cfg.record_event_times = plan.record_event_times;
    cfg.ramp = plan.ramp;
    return cfg;
}

TrajectoryOutput run_one(ModeCatalog& catalog, const RunPlan& plan, int64_t energy,
                         int index) {
    TrajectoryConfig cfg = trajectory_config(plan, energy, index);
    TrajectoryOutput out;
    out.seed = cfg.seed;

    // Equilibrium observers only make sense on fixed-(N,E) timed runs.
    const bool observe = plan.t_end > 0 && !plan.ramp;
    const double t_start = plan.burnin_fraction * plan.t_end;
    TimeAverager avg(t_start);
    OccupationHistogram hist(0, t_start);
    uint64_t window_events = 0;

    EventHook hook;
    FinishHook done;
    if (observe) {
        hook = [&](double t, double dwell, const OccupationState& st,
                   const CollisionVector& cv) {
            avg.observe(t, dwell, st, cv);
            hist.observe(t, dwell, st, cv);
            if (t > t_start) ++window_events;
        };
        done = [&](const OccupationState& st, double t_final) {
            avg.finish(st, t_final);
            hist.finish(st, t_final);
        };
    }
    out.record = run_trajectory(catalog, cfg, hook, done);
    if (observe && avg.duration() > 0) {
        out.block_mean = block_means(catalog, is_ergodic(plan.mode), avg.mean());
        out.ground_pmf = hist.normalized();
        out.window_events = window_events;
        out.window_span = avg.duration();
    }
    return out;
}

}  // namespace

EnsembleResult run_plan(const RunPlan& plan, int threads) {
    validate(plan);
    auto t0 = std::chrono::steady_clock::now();

    EnsembleResult res;
    res.plan = plan;

    ModeCatalog catalog = make_catalog(geometry_of(plan.mode));
    res.energy = resolve_energy(catalog, plan);
    catalog.ensure_energy(res.energy);  // shared read-only past this point

    const int n = plan.trajectories;
    res.trajectories.resize(size_t(n));
    std::atomic<int> next{0};
    std::vector<std::string> errors{size_t(n)};
    int workers = std::clamp(threads, 1, n);
    auto work = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                res.trajectories[size_t(i)] = run_one(catalog, plan, res.energy, i);
            } catch (const std::exception& e) {
                errors[size_t(i)] = e.what();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (int i = 0; i < n; ++i)
        if (!errors[size_t(i)].empty())
            throw std::runtime_error("trajectory " + std::to_string(i) + ": " +
                                     errors[size_t(i)]);

    // Seed-order merge.
    size_t nb = 0, np = 0;
    for (const auto& tr : res.trajectories) {
        nb = std::max(nb, tr.block_mean.size());
        np = std::max(np, tr.ground_pmf.size());
    }
    res.block_mean.assign(nb, 0.0);
    res.ground_pmf.assign(np, 0.0);
    int contributing = 0;
    uint64_t win_events = 0;
    double win_span = 0;
    for (const auto& tr : res.trajectories) {
        if (tr.block_mean.empty()) continue;
        ++contributing;
        for (size_t b = 0; b < tr.block_mean.size(); ++b) res.block_mean[b] += tr.block_mean[b];
        for (size_t j = 0; j < tr.ground_pmf.size(); ++j) res.ground_pmf[j] += tr.ground_pmf[j];
        win_events += tr.window_events;
        win_span += tr.window_span;
    }
    if (contributing > 0) {
        for (double& v : res.block_mean) v /= contributing;
        for (double& v : res.ground_pmf) v /= contributing;
        res.condensate_fraction = res.block_mean.empty()
                                      ? 0.0
                                      : res.block_mean[0] / double(plan.particles);
        res.collision = collision_time(win_span, win_events, double(plan.particles));
    }
    int64_t max_n0 = 0;
    for (const auto& tr : res.trajectories)
        if (!tr.record.final_occ.empty()) max_n0 = std::max(max_n0, tr.record.final_occ[0]);
    res.ground_ensemble_pmf.assign(size_t(max_n0) + 1, 0.0);
    for (const auto& tr : res.trajectories)
        if (!tr.record.final_occ.empty())
            res.ground_ensemble_pmf[size_t(tr.record.final_occ[0])] += 1.0 / n;

    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

namespace {

// Extend until at least `count` energy blocks exist (box energies are not
// dense, so a block count cannot be converted to an energy cutoff directly).
void ensure_blocks(ModeCatalog& c, size_t count, int64_t e_hint) {
    int64_t e = std::max<int64_t>(e_hint, 1);
    c.ensure_energy(e);
    while (c.block_count() < count) c.ensure_energy(e += 16);
}

void write_file(const fs::path& p, const std::string& content,
                std::vector<std::pair<std::string, uint64_t>>& files) {
    std::ofstream os(p, std::ios::binary);
    os << content;
    os.close();
    files.emplace_back(p.filename().string(), fnv_string(content));
}

}  // namespace

std::string write_bundle(const EnsembleResult& res, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::vector<std::pair<std::string, uint64_t>> files;
    std::ostringstream os;
    os.precision(17);

    ModeCatalog catalog = make_catalog(geometry_of(res.plan.mode));
    ensure_blocks(catalog, res.block_mean.size(), res.energy);

    if (!res.block_mean.empty()) {
        os.str("");
        os << "block,energy,degeneracy,mean_occupation\n";
        for (size_t b = 0; b < res.block_mean.size(); ++b)
            os << b << ',' << catalog.block(b).energy << ',' << catalog.block(b).degeneracy
               << ',' << res.block_mean[b] << '\n';
        write_file(fs::path(out_dir) / "blocks.csv", os.str(), files);
    }

    if (!res.ground_pmf.empty() || !res.ground_ensemble_pmf.empty()) {
        os.str("");
        os << "j,time_weighted,ensemble\n";
        size_t nj = std::max(res.ground_pmf.size(), res.ground_ensemble_pmf.size());
        for (size_t j = 0; j < nj; ++j)
            os << j << ',' << (j < res.ground_pmf.size() ? res.ground_pmf[j] : 0.0) << ','
               << (j < res.ground_ensemble_pmf.size() ? res.ground_ensemble_pmf[j] : 0.0)
               << '\n';
        write_file(fs::path(out_dir) / "ground_pmf.csv", os.str(), files);
    }

    os.str("");
    os << "index,seed,events,losses,t_final,frozen,event_log_hash\n";
    for (size_t i = 0; i < res.trajectories.size(); ++i) {
        const auto& tr = res.trajectories[i];
        os << i << ',' << tr.seed << ',' << tr.record.events << ',' << tr.record.losses
           << ',' << tr.record.t_final << ',' << int(tr.record.frozen) << ','
           << tr.record.event_log_hash << '\n';
    }
    write_file(fs::path(out_dir) / "trajectories.csv", os.str(), files);

    for (size_t i = 0; i < res.trajectories.size(); ++i) {
        const auto& samples = res.trajectories[i].record.samples;
        if (samples.empty()) continue;
        os.str("");
        os << "t,n,e,n0";
        for (size_t b = 0; b < res.plan.series_blocks; ++b) os << ",b" << b;
        os << '\n';
        for (const auto& s : samples) {
            os << s.t << ',' << s.n << ',' << s.e << ',' << s.n0;
            for (size_t b = 0; b < res.plan.series_blocks; ++b)
                os << ',' << (b < s.block_occ.size() ? s.block_occ[b] : 0);
            os << '\n';
        }
        write_file(fs::path(out_dir) / ("series-" + std::to_string(i) + ".csv"), os.str(),
                   files);
    }

    nlohmann::json manifest;
    manifest["name"] = res.plan.name;
    manifest["config"] = canonical_text(res.plan);
    manifest["config_hash"] = fnv_string(canonical_text(res.plan));
    manifest["mode"] = mode_name(res.plan.mode);
    manifest["energy"] = res.energy;
    manifest["condensate_fraction"] = res.condensate_fraction;
    manifest["wall_seconds"] = res.wall_seconds;
    manifest["compiler"] = __VERSION__;
    std::vector<uint64_t> seeds;
    for (const auto& tr : res.trajectories) seeds.push_back(tr.seed);
    manifest["seeds"] = seeds;
    nlohmann::json jfiles = nlohmann::json::object();
    for (const auto& [name, hash] : files) jfiles[name] = hash;
    manifest["files"] = jfiles;

    fs::path mp = fs::path(out_dir) / "manifest.json";
    std::ofstream ms(mp, std::ios::binary);
    ms << manifest.dump(2) << '\n';
    return mp.string();
}

CondensateComparison condensate_point(PhysicsMode mode, int64_t n, double t_over_tc,
                                      double t_end, int trajectories, uint64_t seed,
                                      int threads) {
    RunPlan p;
    p.name = "sweep";
    p.mode = mode;
    p.particles = n;
    p.t_over_tc = t_over_tc;
    p.t_end = t_end;
    p.trajectories = trajectories;
    p.seed = seed;
    EnsembleResult res = run_plan(p, threads);

    ModeCatalog catalog = make_catalog(geometry_of(mode));
    double tc = critical_temperature(catalog.geometry(), double(n));
    catalog.ensure_energy(int64_t(std::ceil(30.0 * t_over_tc * tc)) + 10);
    auto gc = solve_grand_canonical(catalog, double(n), double(res.energy));
    double alpha = catalog.geometry() == Geometry::Box ? 1.5 : 3.0;
    double thermo = std::max(0.0, 1.0 - std::pow(gc.temperature / tc, alpha));
    return {n, t_over_tc, res.condensate_fraction, gc.block_mean[0] / double(n), thermo};
}

namespace {

void write_text(const std::string& out_dir, const std::string& name,
                const std::string& content) {
    fs::create_directories(out_dir);
    std::ofstream os(fs::path(out_dir) / name, std::ios::binary);
    os << content;
}

void fig_condensate(Geometry geom, const std::vector<int64_t>& ns, const std::string& file,
                    const std::string& out_dir, uint64_t seed, int threads) {
    PhysicsMode mode =
        geom == Geometry::Box ? PhysicsMode::BoxErgodic : PhysicsMode::OscErgodic;
    const double grid[] = {0.2, 0.35, 0.5, 0.65, 0.8, 0.95, 1.1, 1.4, 1.7};
    std::ostringstream os;
    os.precision(10);
    os << "n,t_over_tc,sim_fraction,gc_fraction,thermo_fraction\n";
    for (int64_t n : ns)
        for (double t : grid) {
            CondensateComparison r = condensate_point(mode, n, t, 2.0, 2, seed, threads);
            os << r.n << ',' << r.t_over_tc << ',' << r.sim << ',' << r.gc << ','
               << r.thermo << '\n';
        }
    write_text(out_dir, file, os.str());
}

void fig7(const std::string& out_dir, uint64_t seed, int threads) {
    std::ostringstream os;
    os.precision(10);
    os << "t_over_tc,sim_mean,sim_sigma,sim_error,oracle_sigma\n";
    for (double t : {0.25, 0.35, 0.45}) {
        RunPlan p = preset_plan("fig7-fluct");
        p.t_over_tc = t;
        p.seed = seed;
        EnsembleResult res = run_plan(p, threads);
        SigmaResult sim = condensate_sigma(res.ground_pmf);

        ModeCatalog catalog = make_catalog(Geometry::Box);
        catalog.ensure_energy(res.energy);
        FluctuationSpec spec;
        spec.n = p.particles;
        spec.e = res.energy;
        auto oracle = fluctuation_sum(catalog, spec);
        os << t << ',' << sim.mean << ',' << sim.sigma << ',' << sim.error << ','
           << oracle.sigma << '\n';
    }
    write_text(out_dir, "fig7.csv", os.str());
}

void fig8(const std::string& out_dir, uint64_t seed, int threads) {
    RunPlan p = preset_plan("fig8-growth");
    p.seed = seed;
    EnsembleResult res = run_plan(p, threads);
    const auto& samples = res.trajectories[0].record.samples;
    std::vector<double> t, nc;
    std::ostringstream os;
    os.precision(10);
    os << "t,n0\n";
    for (const auto& s : samples) {
        t.push_back(s.t);
        nc.push_back(double(s.n0));
        os << s.t << ',' << s.n0 << '\n';
    }
    write_text(out_dir, "fig8_series.csv", os.str());
    GrowthFit fit = growth_fit(t, nc);
    os.str("");
    os << "n_eq,tau,residual,degenerate\n"
       << fit.n_eq << ',' << fit.tau << ',' << fit.residual << ',' << int(fit.degenerate)
       << '\n';
    write_text(out_dir, "fig8_fit.csv", os.str());
}

void fig3(const std::string& out_dir, uint64_t seed, int threads) {
    std::ostringstream os;
    os.precision(10);
    os << "t_over_tc,t_coll_sim,t_coll_classical\n";
    for (double t : {0.3, 0.5, 0.7, 0.9, 1.2, 1.5, 2.0}) {
        RunPlan p = preset_plan("fig3-collision");
        p.t_over_tc = t;
        p.seed = seed;
        EnsembleResult res = run_plan(p, threads);
        ModeCatalog catalog = make_catalog(Geometry::Box);
        ensure_blocks(catalog, res.block_mean.size(), res.energy);
        double classical = box_classical_collision_time(catalog, res.block_mean);
        os << t << ',' << res.collision.t_coll << ',' << classical << '\n';
    }
    write_text(out_dir, "fig3.csv", os.str());
}

void fig13(const std::string& out_dir, uint64_t seed, int threads) {
    for (double gamma : {0.1, 0.5, 1.5}) {
        RunPlan p = preset_plan("fig13-evap");
        p.ramp->gamma = gamma;
        p.seed = seed;
        EnsembleResult res = run_plan(p, threads);
        std::ostringstream os;
        os.precision(10);
        os << "t,n,n_c\n";
        for (const auto& s : res.trajectories[0].record.samples)
            os << s.t << ',' << s.n << ',' << s.n0 << '\n';
        std::ostringstream name;
        name << "fig13_gamma" << gamma << ".csv";
        write_text(out_dir, name.str(), os.str());
    }
}

void fig15(const std::string& out_dir, uint64_t seed, int threads) {
    std::ostringstream os;
    os.precision(10);
    os << "gamma,n_c_90,t_90,metric\n";
    for (double gamma : {0.05, 0.1, 0.2, 0.5, 0.8, 1.5}) {
        RunPlan p = preset_plan("fig15-ramp-scan");
        p.ramp->gamma = gamma;
        p.seed = seed;
        EnsembleResult res = run_plan(p, threads);
        const auto& samples = res.trajectories[0].record.samples;
        int64_t nc_final = samples.empty() ? 0 : samples.back().n0;
        double t90 = res.plan.t_end;
        int64_t nc90 = nc_final;
        for (const auto& s : samples)
            if (double(s.n0) >= 0.9 * double(nc_final)) {
                t90 = s.t;
                nc90 = s.n0;
                break;
            }
        double metric = t90 > 0 ? double(nc90) / t90 : 0.0;
        os << gamma << ',' << nc90 << ',' << t90 << ',' << metric << '\n';
    }
    write_text(out_dir, "fig15.csv", os.str());
}

}  // namespace

void reproduce_figure(const std::string& id, const std::string& out_dir, uint64_t seed,
                      int threads) {
    if (id == "fig1")
        fig_condensate(Geometry::Box, {100, 500}, "fig1.csv", out_dir, seed, threads);
    else if (id == "fig10")
        fig_condensate(Geometry::Oscillator, {300, 500}, "fig10.csv", out_dir, seed, threads);
    else if (id == "fig7")
        fig7(out_dir, seed, threads);
    else if (id == "fig8")
        fig8(out_dir, seed, threads);
    else if (id == "fig3")
        fig3(out_dir, seed, threads);
    else if (id == "fig13")
        fig13(out_dir, seed, threads);
    else if (id == "fig15")
        fig15(out_dir, seed, threads);
    else
        throw ConfigError("unknown figure id '" + id + "'");
}

}  // namespace qbme
