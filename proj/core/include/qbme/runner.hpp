#pragma once

#include <string>

#include "qbme/config.hpp"
#include "qbme/observables.hpp"

namespace qbme {

struct TrajectoryOutput {
    uint64_t seed = 0;
    TrajectoryRecord record;
    std::vector<double> block_mean;  ///< time-averaged particles per block
    std::vector<double> ground_pmf;  ///< time-weighted W(j) of the ground site
    uint64_t window_events = 0;      ///< events inside the averaging window
    double window_span = 0;
};

/// Merged ensemble: trajectories are combined in seed order regardless of
/// completion order, so the result is independent of scheduling.
struct EnsembleResult {
    RunPlan plan;
    int64_t energy = 0;  ///< resolved integer total energy
    std::vector<TrajectoryOutput> trajectories;
    std::vector<double> block_mean;
    std::vector<double> ground_pmf;          ///< time-weighted, merged
    std::vector<double> ground_ensemble_pmf; ///< endpoint counts across trajectories
    double condensate_fraction = 0;
    CollisionTimeStats collision;
    double wall_seconds = 0;
};

/// Execute the plan's trajectories on `threads` workers over a shared
/// immutable catalog and merge the statistics.
EnsembleResult run_plan(const RunPlan& plan, int threads);

/// CSV/JSON output bundle + manifest under out_dir (created if missing).
/// Returns the manifest path.
std::string write_bundle(const EnsembleResult& result, const std::string& out_dir);

/// One microcanonical simulation point against its grand-canonical and
/// thermodynamic-limit condensate fractions at the same (N, E).
struct CondensateComparison {
    int64_t n = 0;
    double t_over_tc = 0;
    double sim = 0;
    double gc = 0;
    double thermo = 0;
};

CondensateComparison condensate_point(PhysicsMode mode, int64_t n, double t_over_tc,
                                      double t_end, int trajectories, uint64_t seed,
                                      int threads);

/// Figure reproductions: fig1, fig3, fig7, fig8, fig10, fig13, fig15.
/// Writes the figure's data tables under out_dir.
void reproduce_figure(const std::string& figure_id, const std::string& out_dir,
                      uint64_t seed, int threads);

}  // namespace qbme
