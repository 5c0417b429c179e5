#include "qbme/kernel.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace qbme {

namespace {

constexpr double kInvPi = 1.0 / std::numbers::pi;

inline double pair_sym(uint32_t x, uint32_t y) { return x == y ? 0.5 : 1.0; }

inline bool same_pair(uint32_t a, uint32_t b, uint32_t c, uint32_t d) {
    return a == c && b == d;  // both pairs canonically sorted
}

inline uint64_t pack_momentum(const std::array<int, 3>& u, const std::array<int, 3>& v) {
    uint64_t key = 0;
    for (size_t k = 0; k < 3; ++k) {
        int s = u[k] + v[k] + 1024;
        key = (key << 11) | uint64_t(s);
    }
    return key;
}

inline void sort2(uint32_t& x, uint32_t& y) {
    if (x > y) std::swap(x, y);
}

}  // namespace

CollisionKernel::CollisionKernel(const ModeCatalog& catalog, PhysicsMode mode)
    : catalog_(&catalog), mode_(mode) {
    if (geometry_of(mode) != catalog.geometry())
        throw std::invalid_argument("physics mode does not match catalog geometry");
}

double CollisionKernel::structural_factor(const CollisionVector& cv) const {
    uint32_t a = cv.a, b = cv.b, c = cv.c, d = cv.d;
    sort2(a, b);
    sort2(c, d);
    if (same_pair(a, b, c, d)) return 0.0;  // identity channel

    const double sym = pair_sym(a, b) * pair_sym(c, d);
    switch (mode_) {
        case PhysicsMode::BoxNonErgodic: {
            const auto& ma = catalog_->mode(a);
            const auto& mb = catalog_->mode(b);
            const auto& mc = catalog_->mode(c);
            const auto& md = catalog_->mode(d);
            if (ma.energy() + mb.energy() != mc.energy() + md.energy()) return 0.0;
            for (size_t k = 0; k < 3; ++k)
                if (ma.m[k] + mb.m[k] != mc.m[k] + md.m[k]) return 0.0;
            return kInvPi * sym;
        }
        case PhysicsMode::OscErgodic: {
            int64_t j1 = catalog_->block(a).energy, j2 = catalog_->block(b).energy;
            int64_t j3 = catalog_->block(c).energy, j4 = catalog_->block(d).energy;
            if (j1 + j2 != j3 + j4) return 0.0;
            int64_t jmin = std::min(std::min(j1, j2), std::min(j3, j4));
            return 0.25 * double(osc_shell_degeneracy(jmin)) * sym;
        }
        case PhysicsMode::BoxErgodic: {
            int64_t e1 = catalog_->block(a).energy, e2 = catalog_->block(b).energy;
            int64_t e3 = catalog_->block(c).energy, e4 = catalog_->block(d).energy;
            if (e1 + e2 != e3 + e4) return 0.0;
            return kInvPi * box_tuple_count(e1, e2, e3, e4) * sym;
        }
    }
    return 0.0;
}

double CollisionKernel::occupation_factor(const OccupationState& st,
                                          const CollisionVector& cv) const {
    uint32_t a = cv.a, b = cv.b, c = cv.c, d = cv.d;
    sort2(a, b);
    sort2(c, d);
    if (!ergodic()) {
        double na = double(st.occupation(a));
        double source = (a == b) ? na * (na - 1) : na * double(st.occupation(b));
        if (source <= 0) return 0.0;
        double nc = double(st.occupation(c));
        double target = (c == d) ? (nc + 1) * (nc + 2)
                                 : (nc + 1) * double(st.occupation(d) + 1);
        return source * target;
    }
    double ga = double(st.site_degeneracy(a)), gb = double(st.site_degeneracy(b));
    double Ba = double(st.occupation(a)), Bb = double(st.occupation(b));
    double source = (a == b) ? (Ba / ga) * ((Ba - 1) / ga) : (Ba / ga) * (Bb / gb);
    if (source <= 0) return 0.0;
    double gc = double(st.site_degeneracy(c)), gd = double(st.site_degeneracy(d));
    double Bc = double(st.occupation(c)), Bd = double(st.occupation(d));
    double target = (c == d) ? ((Bc + gc) / gc) * ((Bc + gc + 1) / gc)
                             : ((Bc + gc) / gc) * ((Bd + gd) / gd);
    return source * target;
}

void CollisionKernel::splits_for_pair(uint32_t a, uint32_t b,
                                      std::vector<CollisionVector>& out) const {
    sort2(a, b);
    if (!ergodic()) {
        const auto& ma = catalog_->mode(a);
        const auto& mb = catalog_->mode(b);
        const int64_t etot = ma.energy() + mb.energy();
        if (etot > catalog_->energy_limit())
            throw std::logic_error("catalog not extended to the pair energy");
        const std::array<int, 3> M{ma.m[0] + mb.m[0], ma.m[1] + mb.m[1], ma.m[2] + mb.m[2]};
        for (int64_t e3 = 0; 2 * e3 <= etot; ++e3) {
            int blk3 = catalog_->block_at_energy(e3);
            int blk4 = catalog_->block_at_energy(etot - e3);
            if (blk3 < 0 || blk4 < 0) continue;
            const auto& B3 = catalog_->block(size_t(blk3));
            for (int64_t i = 0; i < B3.degeneracy; ++i) {
                uint32_t c = B3.first_mode + uint32_t(i);
                const auto& mc = catalog_->mode(c);
                BoxMode md{{M[0] - mc.m[0], M[1] - mc.m[1], M[2] - mc.m[2]}};
                if (md.energy() != etot - e3) continue;
                int64_t di = catalog_->mode_index(md);
                if (di < 0) continue;
                uint32_t d = uint32_t(di);
                if (e3 == etot - e3 && c > d) continue;  // dedupe within a shell
                uint32_t cc = c, dd = d;
                sort2(cc, dd);
                if (same_pair(a, b, cc, dd)) continue;
                out.push_back({a, b, cc, dd});
            }
        }
        return;
    }
    const int64_t etot = catalog_->block(a).energy + catalog_->block(b).energy;
    if (etot > catalog_->energy_limit())
        throw std::logic_error("catalog not extended to the pair energy");
    for (int64_t e3 = 0; 2 * e3 <= etot; ++e3) {
        int blk3 = catalog_->block_at_energy(e3);
        int blk4 = catalog_->block_at_energy(etot - e3);
        if (blk3 < 0 || blk4 < 0) continue;
        uint32_t c = uint32_t(blk3), d = uint32_t(blk4);
        sort2(c, d);
        if (same_pair(a, b, c, d)) continue;
        if (mode_ == PhysicsMode::BoxErgodic &&
            box_tuple_count(catalog_->block(a).energy, catalog_->block(b).energy, e3,
                            etot - e3) <= 0)
            continue;
        out.push_back({a, b, c, d});
    }
}

void CollisionKernel::channels_for_source(const OccupationState& st, uint32_t s,
                                          const std::vector<uint32_t>& occupied,
                                          std::vector<ChannelRate>& out) const {
    std::vector<CollisionVector> splits;
    for (uint32_t t : occupied) {
        if (t == s && st.occupation(s) < 2) continue;
        splits.clear();
        splits_for_pair(std::min(s, t), std::max(s, t), splits);
        for (const auto& cv : splits) {
            double r = rate(st, cv);
            if (r > 0) out.push_back({cv, structural_factor(cv), r});
        }
    }
}

std::vector<ChannelRate> CollisionKernel::enumerate_channels(const OccupationState& st) const {
    std::vector<ChannelRate> out;
    std::vector<CollisionVector> splits;
    auto occupied = st.occupied_sites();
    for (size_t i = 0; i < occupied.size(); ++i) {
        for (size_t j = i; j < occupied.size(); ++j) {
            uint32_t a = occupied[i], b = occupied[j];
            if (a == b && st.occupation(a) < 2) continue;
            splits.clear();
            splits_for_pair(a, b, splits);
            for (const auto& cv : splits) {
                double r = rate(st, cv);
                if (r > 0) out.push_back({cv, structural_factor(cv), r});
            }
        }
    }
    return out;
}

double CollisionKernel::box_tuple_count(int64_t e1, int64_t e2, int64_t e3,
                                        int64_t e4) const {
    int64_t p1a = std::min(e1, e2), p1b = std::max(e1, e2);
    int64_t p2a = std::min(e3, e4), p2b = std::max(e3, e4);
    if (std::tie(p2a, p2b) < std::tie(p1a, p1b)) {
        std::swap(p1a, p2a);  // time-reversal symmetry of the tuple count
        std::swap(p1b, p2b);
    }
    uint64_t key = (uint64_t(p1a) << 48) | (uint64_t(p1b) << 32) | (uint64_t(p2a) << 16) |
                   uint64_t(p2b);
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = tuple_cache_.find(key);
        if (it != tuple_cache_.end()) return it->second;
    }
    double t = box_tuple_count_uncached(p1a, p1b, p2a, p2b);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    tuple_cache_.emplace(key, t);
    return t;
}

double CollisionKernel::box_tuple_count_uncached(int64_t e1, int64_t e2, int64_t e3,
                                                 int64_t e4) const {
    if (e1 + e2 != e3 + e4) return 0.0;
    int b1 = catalog_->block_at_energy(e1);
    int b2 = catalog_->block_at_energy(e2);
    int b3 = catalog_->block_at_energy(e3);
    int b4 = catalog_->block_at_energy(e4);
    if (b1 < 0 || b2 < 0 || b3 < 0 || b4 < 0) return 0.0;

    // Map: total momentum -> number of ordered (m3,m4) pairs realizing it.
    std::unordered_map<uint64_t, int32_t> pairs;
    const auto& B3 = catalog_->block(size_t(b3));
    const auto& B4 = catalog_->block(size_t(b4));
    pairs.reserve(size_t(B3.degeneracy * 2));
    for (int64_t i = 0; i < B3.degeneracy; ++i) {
        const auto& m3 = catalog_->mode(B3.first_mode + uint32_t(i));
        for (int64_t j = 0; j < B4.degeneracy; ++j) {
            const auto& m4 = catalog_->mode(B4.first_mode + uint32_t(j));
            ++pairs[pack_momentum(m3.m, m4.m)];
        }
    }
    double total = 0;
    const auto& B1 = catalog_->block(size_t(b1));
    const auto& B2 = catalog_->block(size_t(b2));
    for (int64_t i = 0; i < B1.degeneracy; ++i) {
        const auto& m1 = catalog_->mode(B1.first_mode + uint32_t(i));
        for (int64_t j = 0; j < B2.degeneracy; ++j) {
            const auto& m2 = catalog_->mode(B2.first_mode + uint32_t(j));
            auto it = pairs.find(pack_momentum(m1.m, m2.m));
            if (it != pairs.end()) total += it->second;
        }
    }
    return total;
}

}  // namespace qbme
