#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qbme/catalog.hpp"
#include "qbme/rng.hpp"

namespace qbme {

/// A binary collision 1+2 -> 3+4 between sites (modes in the non-ergodic
/// representation, energy blocks in the ergodic one).  Stored canonically
/// with a <= b and c <= d.
struct CollisionVector {
    uint32_t a = 0, b = 0, c = 0, d = 0;

    CollisionVector reversed() const { return {c, d, a, b}; }
    bool operator==(const CollisionVector&) const = default;
};

/// Occupation-number configuration with cached conserved quantities.
///
/// Non-ergodic: integer occupation per mode, with the total momentum tracked
/// for the box.  Ergodic: integer particle count per energy block (the
/// fractional occupation n = B/g of the ergodic reduction enters only in the
/// rate formulas, never in the bookkeeping here).
class OccupationState {
  public:
    OccupationState(const ModeCatalog& catalog, bool ergodic);

    const ModeCatalog& catalog() const { return *catalog_; }
    bool ergodic() const { return ergodic_; }

    size_t site_count() const;
    int64_t occupation(uint32_t site) const {
        return site < occ_.size() ? occ_[site] : 0;
    }
    int64_t site_energy(uint32_t site) const;
    int64_t site_degeneracy(uint32_t site) const;

    int64_t particles() const { return n_total_; }
    int64_t energy() const { return e_total_; }
    /// Total momentum, box non-ergodic only (zero vector otherwise).
    const std::array<int64_t, 3>& momentum() const { return p_total_; }

    void add_particles(uint32_t site, int64_t count);
    /// Remove one particle (evaporation loss).
    void remove_particle(uint32_t site);

    /// Apply the collision: a,b lose one particle each (two if a==b),
    /// c,d gain one each.  Energy conservation is checked exactly; a
    /// violation indicates a corrupted rate catalog and throws logic_error.
    void apply(const CollisionVector& cv);
    void revert(const CollisionVector& cv) { apply(cv.reversed()); }

    /// Occupied sites in index order (for enumeration).
    std::vector<uint32_t> occupied_sites() const;

    /// Recompute N, E, P from scratch (oracle for the cached values).
    void recompute_totals(int64_t& n, int64_t& e, std::array<int64_t, 3>& p) const;

    void dump_csv(std::ostream& os, uint64_t seed = 0, uint64_t events = 0) const;

  private:
    void bump(uint32_t site, int64_t delta);

    const ModeCatalog* catalog_;
    bool ergodic_;
    std::vector<int64_t> occ_;
    int64_t n_total_ = 0;
    int64_t e_total_ = 0;
    std::array<int64_t, 3> p_total_{0, 0, 0};
};

/// Initial-distribution description for init_from_spec.
struct InitSpec {
    enum class Kind {
        GaussianLike,  // random placement between first excited level and 2E/N
        ThermalLike,   // sample from a mean-occupation profile, then repair
        Explicit,      // occupations given directly
    };
    Kind kind = Kind::GaussianLike;
    int64_t particles = 0;
    int64_t energy = 0;
    bool avoid_ground = true;                      // GaussianLike
    std::vector<double> block_profile;             // ThermalLike: mean particles per block
    std::vector<std::pair<uint32_t, int64_t>> occupations;  // Explicit
};

class InitError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Build a state with exactly the requested (N, E).  After the initial random
/// placement, particles are moved one at a time toward the energy target
/// until it is met exactly.  Deterministic under the given RNG.
OccupationState init_from_spec(ModeCatalog& catalog, bool ergodic, const InitSpec& spec,
                               Rng& rng);

}  // namespace qbme
