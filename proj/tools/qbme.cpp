// Command-line front end: catalog / run / oracle / evaporate / reproduce /
// selftest.  Exit codes: 0 success, 2 configuration error, 3 runtime failure,
// 4 acceptance-selftest failure.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "qbme/classical.hpp"
#include "qbme/equilibrium.hpp"
#include "qbme/fluctuations.hpp"
#include "qbme/runner.hpp"
#include "qbme/selftest.hpp"

namespace {

struct CommonOpts {
    std::string config;
    std::string preset;
    std::string out_dir;
    uint64_t seed = 0;  // 0: keep the plan's seed
    int trajectories = 0;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_plan = true) {
    if (with_plan) {
        cmd->add_option("--config", o.config, "Run-plan file (INI-style or JSON)");
        cmd->add_option("--preset", o.preset, "Named experiment preset");
        cmd->add_option("--seed", o.seed, "Override the plan's base seed");
        cmd->add_option("--trajectories", o.trajectories, "Override trajectory count");
    }
    cmd->add_option("--out-dir", o.out_dir, "Output directory");
    cmd->add_option("--threads", o.threads, "Worker threads (default: hardware)");
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

qbme::RunPlan load_plan(const CommonOpts& o) {
    if (o.config.empty() == o.preset.empty())
        throw qbme::ConfigError("exactly one of --config or --preset is required");
    qbme::RunPlan plan = o.config.empty() ? qbme::preset_plan(o.preset)
                                          : qbme::parse_config_file(o.config);
    if (o.seed) plan.seed = o.seed;
    if (o.trajectories > 0) plan.trajectories = o.trajectories;
    qbme::validate(plan);
    return plan;
}

std::ofstream open_out(const std::string& out_dir, const std::string& name) {
    std::filesystem::create_directories(out_dir);
    std::string path = out_dir + "/" + name;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    return os;
}

int cmd_catalog(const CommonOpts& o, const std::string& geometry, int64_t e_max) {
    qbme::ModeCatalog catalog = geometry == "osc"
                                    ? qbme::ModeCatalog::oscillator(e_max)
                                    : qbme::ModeCatalog::box(e_max);
    if (o.out_dir.empty()) {
        catalog.dump_csv(std::cout);
    } else {
        auto os = open_out(o.out_dir, "catalog.csv");
        catalog.dump_csv(os);
        std::cout << o.out_dir << "/catalog.csv (" << catalog.block_count()
                  << " blocks, " << catalog.state_count() << " states)\n";
    }
    return 0;
}

int cmd_run(const CommonOpts& o) {
    qbme::RunPlan plan = load_plan(o);
    qbme::EnsembleResult res = qbme::run_plan(plan, resolve_threads(o.threads));
    std::string out_dir = o.out_dir.empty() ? "out/" + plan.name : o.out_dir;
    std::string manifest = qbme::write_bundle(res, out_dir);
    std::cout << "condensate fraction " << res.condensate_fraction << ", t_coll "
              << res.collision.t_coll << ", manifest " << manifest << "\n";
    return 0;
}

int cmd_evaporate(const CommonOpts& o) {
    qbme::RunPlan plan = load_plan(o);
    if (!plan.ramp) throw qbme::ConfigError("evaporate requires ramp.* parameters");
    return cmd_run(o);
}

int cmd_oracle(const CommonOpts& o) {
    qbme::RunPlan plan = load_plan(o);
    qbme::ModeCatalog catalog = qbme::geometry_of(plan.mode) == qbme::Geometry::Box
                                    ? qbme::ModeCatalog::box(1)
                                    : qbme::ModeCatalog::oscillator(1);
    int64_t energy = qbme::resolve_energy(catalog, plan);
    catalog.ensure_energy(energy);
    auto gc = qbme::solve_grand_canonical(catalog, double(plan.particles), double(energy));
    double tc = qbme::critical_temperature(catalog.geometry(), double(plan.particles));
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!o.out_dir.empty()) {
        file = open_out(o.out_dir, "oracle.csv");
        os = &file;
    }
    *os << "# N=" << plan.particles << " E=" << energy << " mu=" << gc.mu
        << " T=" << gc.temperature << " T/Tc=" << gc.temperature / tc
        << " condensate_fraction=" << gc.block_mean[0] / double(plan.particles) << "\n";
    *os << "block,energy,mean_occupation\n";
    for (size_t b = 0; b < gc.block_mean.size(); ++b)
        *os << b << "," << catalog.block(b).energy << "," << gc.block_mean[b] << "\n";
    if (catalog.geometry() == qbme::Geometry::Box && gc.temperature < 0.55 * tc) {
        qbme::FluctuationSpec spec;
        spec.n = plan.particles;
        spec.e = energy;
        auto fl = qbme::fluctuation_sum(catalog, spec);
        *os << "# fluctuation oracle: mean=" << fl.mean << " sigma=" << fl.sigma << "\n";
    }
    if (!o.out_dir.empty()) std::cout << o.out_dir << "/oracle.csv\n";
    return 0;
}

int cmd_reproduce(const CommonOpts& o, const std::string& figure) {
    std::string out_dir = o.out_dir.empty() ? "out/" + figure : o.out_dir;
    uint64_t seed = o.seed ? o.seed : 1;
    qbme::reproduce_figure(figure, out_dir, seed, resolve_threads(o.threads));
    std::cout << figure << " tables written under " << out_dir << "\n";
    return 0;
}

int cmd_selftest(const CommonOpts& o, const std::vector<int>& only) {
    uint64_t seed = o.seed ? o.seed : 1;
    auto results = qbme::run_selftest(resolve_threads(o.threads), seed, only);
    for (const auto& r : results) {
        std::printf("[%s] criterion %2d %-32s (%.1fs)  %s\n", r.pass ? "PASS" : "FAIL",
                    r.id, r.name.c_str(), r.seconds, r.detail.c_str());
        std::fflush(stdout);
    }
    return qbme::all_passed(results) ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic simulator of the quantum Boltzmann master equation "
                 "for a finite trapped Bose gas"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string geometry = "box";
    int64_t e_max = 20;
    std::string figure;
    std::vector<int> only;

    auto* c_catalog = app.add_subcommand("catalog", "Dump the one-particle state space");
    c_catalog->add_option("--geometry", geometry, "box or osc")
        ->check(CLI::IsMember({"box", "osc"}));
    c_catalog->add_option("--e-max", e_max, "Energy / shell cutoff");
    add_common(c_catalog, opts, false);

    auto* c_run = app.add_subcommand("run", "Run an ensemble and write its bundle");
    add_common(c_run, opts);

    auto* c_oracle =
        app.add_subcommand("oracle", "Equilibrium + fluctuation oracles for a plan");
    add_common(c_oracle, opts);

    auto* c_evap = app.add_subcommand("evaporate", "Run an evaporative-cooling plan");
    add_common(c_evap, opts);

    auto* c_repr = app.add_subcommand("reproduce", "Re-derive a figure's data tables");
    c_repr->add_option("figure", figure, "fig1|fig3|fig7|fig8|fig10|fig13|fig15")
        ->required();
    add_common(c_repr, opts);

    auto* c_self = app.add_subcommand("selftest", "Run the acceptance criteria");
    c_self->add_option("--only", only, "Criterion ids to run (default: all)");
    add_common(c_self, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*c_catalog) return cmd_catalog(opts, geometry, e_max);
        if (*c_run) return cmd_run(opts);
        if (*c_oracle) return cmd_oracle(opts);
        if (*c_evap) return cmd_evaporate(opts);
        if (*c_repr) return cmd_reproduce(opts, figure);
        if (*c_self) return cmd_selftest(opts, only);
    } catch (const qbme::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
