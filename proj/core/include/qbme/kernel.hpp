#pragma once

#include <cstdint>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "qbme/catalog.hpp"
#include "qbme/state.hpp"

namespace qbme {

enum class PhysicsMode { BoxNonErgodic, BoxErgodic, OscErgodic };

inline bool is_ergodic(PhysicsMode m) { return m != PhysicsMode::BoxNonErgodic; }
inline Geometry geometry_of(PhysicsMode m) {
    return m == PhysicsMode::OscErgodic ? Geometry::Oscillator : Geometry::Box;
}

/// A possible collision together with its occupation-independent structural
/// factor S and the full rate P = S * (occupation factors), in units of the
/// reference rate of the geometry.
struct ChannelRate {
    CollisionVector cv;
    double structural = 0;
    double rate = 0;
};

/// Transition probabilities per unit time for the three physics modes.
///
/// Channels are unordered pairs {1,2} -> {3,4}; the permutation factor of the
/// rate formula is folded into S and halves when the pair is a single site
/// taken twice.  Same-site pairs carry the operator-ordered occupation
/// factors n(n-1) and (n+1)(n+2) (ergodic: n(n-1/g) and (n+1)(n+1+1/g)),
/// which makes every channel's rate equal to that of its reverse in the
/// time-reversed state.
class CollisionKernel {
  public:
    CollisionKernel(const ModeCatalog& catalog, PhysicsMode mode);

    PhysicsMode mode() const { return mode_; }
    bool ergodic() const { return is_ergodic(mode_); }
    const ModeCatalog& catalog() const { return *catalog_; }

    /// Structural factor S >= 0; zero when the collision is impossible
    /// (conservation violated, or no momentum-conserving tuple exists).
    double structural_factor(const CollisionVector& cv) const;

    double occupation_factor(const OccupationState& st, const CollisionVector& cv) const;

    double rate(const OccupationState& st, const CollisionVector& cv) const {
        double occ = occupation_factor(st, cv);
        return occ > 0 ? structural_factor(cv) * occ : 0.0;
    }

    /// All conserving, non-identity target splits {c,d} for the source pair
    /// {a,b}, with positive structural factor.  Canonical: c <= d.
    void splits_for_pair(uint32_t a, uint32_t b, std::vector<CollisionVector>& out) const;

    /// Channels sourced by site s (paired with every occupied site, including
    /// s itself when doubly occupied) that currently have nonzero rate.
    void channels_for_source(const OccupationState& st, uint32_t s,
                             const std::vector<uint32_t>& occupied,
                             std::vector<ChannelRate>& out) const;

    /// Exactly the channels with nonzero occupation and structural factor.
    std::vector<ChannelRate> enumerate_channels(const OccupationState& st) const;

    /// Ordered count of momentum-conserving mode 4-tuples between box energy
    /// shells (the degeneracy sum of the ergodic reduction).  Box only.
    double box_tuple_count(int64_t e1, int64_t e2, int64_t e3, int64_t e4) const;

  private:
    double box_tuple_count_uncached(int64_t e1, int64_t e2, int64_t e3, int64_t e4) const;

    const ModeCatalog* catalog_;
    PhysicsMode mode_;
    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<uint64_t, double> tuple_cache_;
};

}  // namespace qbme
