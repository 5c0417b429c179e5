#pragma once

#include <cstdint>
#include <vector>

#include "qbme/engine.hpp"

namespace qbme {

/// Time-weighted mean occupation per site over [t_start, t_end].  Updates
/// lazily: only the four sites touched by each event are revisited, so the
/// per-event cost is O(1) regardless of catalog size.
class TimeAverager {
  public:
    explicit TimeAverager(double t_start) : t_start_(t_start) {}

    /// Feed from the engine hook (pre-event state).
    void observe(double t, double dwell, const OccupationState& st,
                 const CollisionVector& cv);

    /// Close the window with the state that held until t_end.
    void finish(const OccupationState& st, double t_end);

    const std::vector<double>& mean() const { return mean_; }
    double duration() const { return duration_; }

  private:
    void touch(uint32_t site, double t, const OccupationState& st);

    double t_start_;
    bool started_ = false;
    bool finished_ = false;
    double t0_ = 0;
    double duration_ = 0;
    std::vector<double> integral_;
    std::vector<double> last_;
    std::vector<double> mean_;
};

/// Sum mode-resolved means into per-block means; pass-through when the sites
/// already are blocks.
std::vector<double> block_means(const ModeCatalog& catalog, bool ergodic,
                                const std::vector<double>& site_mean);

/// W(j) for one site: time-weighted within a trajectory and/or one count per
/// trajectory endpoint across an ensemble.
class OccupationHistogram {
  public:
    OccupationHistogram(uint32_t site, double t_start) : site_(site), t_start_(t_start) {}

    void observe(double t, double dwell, const OccupationState& st,
                 const CollisionVector& cv);
    void finish(const OccupationState& st, double t_end);
    void add_count(int64_t j);

    /// Normalized estimate (sums to 1).
    std::vector<double> normalized() const;
    uint32_t site() const { return site_; }

  private:
    uint32_t site_;
    double t_start_;
    bool started_ = false;
    double last_ = 0;
    std::vector<double> weight_;
};

struct SigmaResult {
    double mean = 0;
    double sigma = 0;
    double error = 0;  ///< sqrt(sigma((X - mean)^2) / mean)
};

/// Moments of a condensate-count pmf, with the error-bar estimator.
SigmaResult condensate_sigma(const std::vector<double>& pmf);

struct CollisionTimeStats {
    double mean_dt = 0;
    uint64_t events = 0;
    double t_coll = 0;  ///< per-particle: (N/2) x mean event spacing
};

CollisionTimeStats collision_time(double t_span, uint64_t events, double n_particles);

/// Classical hard-sphere comparator for the box, from per-block mean
/// occupations (reference time units): 2 / sum_i sqrt(e_i) <n_i>.
double box_classical_collision_time(const ModeCatalog& catalog,
                                    const std::vector<double>& block_mean);

/// Oscillator comparator from the moments E_s = ((1/N) sum e^s <n>)^(1/s).
double osc_classical_collision_time(const ModeCatalog& catalog,
                                    const std::vector<double>& block_mean);

struct GrowthFit {
    double n_eq = 0;
    double tau = 0;
    double residual = 0;  ///< rms residual
    bool degenerate = false;
};

/// Least-squares fit of n(t) = n_eq (1 - exp(-t/tau)): coarse log-grid in tau
/// with the amplitude solved linearly, then Gauss-Newton refinement.
GrowthFit growth_fit(const std::vector<double>& t, const std::vector<double>& nc);

/// Relaxation distortion: within the first excited shell, pairs of particles
/// sitting on opposite-momentum modes are moved onto one fixed opposite-mode
/// pair.  Preserves N, E and total momentum exactly.  Returns the number of
/// particles moved.  Mode-resolved box states only.
int64_t ergodization_distort(OccupationState& st);

/// Stronger relaxation distortion: repeatedly applies the energy- and
/// momentum-conserving collision move that deposits the most particles onto
/// the opposite-momentum first-shell pair (+/-x), until target_moved
/// particles have been pumped in or no move adds another.  Because every
/// step is a collision, the distorted state stays inside the reachable
/// class.  Mode-resolved box states only.  Returns the net number of
/// particles added to the pair.
int64_t collision_distort(OccupationState& st, const CollisionKernel& kernel,
                          int64_t target_moved);

/// Chi-square-style distance between simulated and reference block profiles,
/// per particle: sum (a-b)^2 / max(b, floor) / N.
double profile_distance(const std::vector<double>& sim, const std::vector<double>& ref);

}  // namespace qbme
