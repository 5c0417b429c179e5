#pragma once

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "qbme/kernel.hpp"

namespace qbme {

/// Set of currently possible collisions with per-channel rates, the
/// maintained total rate, and O(log n) roulette selection.
///
/// After an event only channels referencing one of the four touched sites are
/// recomputed; everything else is untouched.  rebuild() re-enumerates from
/// scratch and is called periodically by the engine to bound float drift.
class RateCatalog {
  public:
    explicit RateCatalog(const CollisionKernel& kernel) : kernel_(&kernel) {}

    void build(const OccupationState& st);
    void rebuild(const OccupationState& st) { build(st); }

    double total_rate() const;
    size_t active_channels() const { return alive_count_; }

    /// Channel selected by roulette position r in [0, total_rate()).
    const CollisionVector& sample(double r) const;

    /// Incremental update; `st` must already reflect the applied collision.
    void on_event(const OccupationState& st, const CollisionVector& cv);

    /// Evaporation update: one particle was removed from `site`.
    void on_loss(const OccupationState& st, uint32_t site);

    /// Independent check value: fresh enumeration, bypassing the maintained
    /// structures entirely.
    double recompute_total(const OccupationState& st) const;

    void dump_csv(std::ostream& os, const OccupationState& st) const;

  private:
    struct Slot {
        CollisionVector cv;
        double rate = 0;
        uint32_t gen = 0;
        bool alive = false;
    };
    struct Ref {
        uint32_t id;
        uint32_t gen;
    };

    void insert_channel(const CollisionVector& cv, double rate);
    void kill_slot(uint32_t id);
    void set_rate(uint32_t id, double rate);
    void touch_site(const OccupationState& st, uint32_t s, uint64_t stamp);
    void discover_sources(const OccupationState& st, uint32_t s);
    void sync_occupied(const OccupationState& st, uint32_t s);

    using Key = unsigned __int128;
    struct KeyHash {
        size_t operator()(Key k) const {
            uint64_t z = uint64_t(k) ^ (uint64_t(k >> 64) * 0x9e3779b97f4a7c15ull);
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            return size_t(z ^ (z >> 31));
        }
    };
    static Key key_of(const CollisionVector& cv);

    // Fenwick tree over slot rates (1-based internal array).
    void fw_resize(size_t n);
    void fw_add(size_t i, double delta);
    size_t fw_find(double r) const;

    const CollisionKernel* kernel_;
    std::vector<Slot> slots_;
    std::vector<uint64_t> slot_stamp_;
    std::vector<double> fen_;
    std::vector<uint32_t> free_slots_;
    std::unordered_map<Key, uint32_t, KeyHash> by_key_;
    std::vector<std::vector<Ref>> site_index_;
    std::vector<uint32_t> occupied_list_;
    std::unordered_map<uint32_t, size_t> occupied_pos_;
    size_t alive_count_ = 0;
    uint64_t event_stamp_ = 0;
};

}  // namespace qbme
