#include "qbme/rate_catalog.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace qbme {

RateCatalog::Key RateCatalog::key_of(const CollisionVector& cv) {
    uint64_t hi = (uint64_t(cv.a) << 32) | cv.b;
    uint64_t lo = (uint64_t(cv.c) << 32) | cv.d;
    return (Key(hi) << 64) | lo;
}

void RateCatalog::fw_resize(size_t n) {
    fen_.assign(n + 1, 0.0);
}

void RateCatalog::fw_add(size_t i, double delta) {
    for (size_t j = i + 1; j < fen_.size(); j += j & (0 - j)) fen_[j] += delta;
}

double RateCatalog::total_rate() const {
    double t = 0;
    size_t n = fen_.size() - 1;
    for (size_t j = n; j > 0; j -= j & (0 - j)) t += fen_[j];
    return std::max(t, 0.0);
}

size_t RateCatalog::fw_find(double r) const {
    size_t n = fen_.size() - 1;
    size_t mask = 1;
    while ((mask << 1) <= n) mask <<= 1;
    size_t idx = 0;
    for (; mask; mask >>= 1) {
        size_t next = idx + mask;
        if (next <= n && fen_[next] <= r) {
            idx = next;
            r -= fen_[next];
        }
    }
    return idx;  // 0-based slot index with prefix(idx) <= r < prefix(idx+1)
}

const CollisionVector& RateCatalog::sample(double r) const {
    size_t idx = fw_find(r);
    if (idx >= slots_.size() || !slots_[idx].alive || slots_[idx].rate <= 0) {
        // Float dust at the upper edge: fall back to the last live channel.
        for (size_t i = slots_.size(); i-- > 0;)
            if (slots_[i].alive && slots_[i].rate > 0) return slots_[i].cv;
        throw std::logic_error("sample called on an empty rate catalog");
    }
    return slots_[idx].cv;
}

void RateCatalog::insert_channel(const CollisionVector& cv, double rate) {
    Key key = key_of(cv);
    auto it = by_key_.find(key);
    if (it != by_key_.end() && slots_[it->second].alive) return;
    uint32_t id;
    if (!free_slots_.empty()) {
        id = free_slots_.back();
        free_slots_.pop_back();
    } else {
        id = uint32_t(slots_.size());
        slots_.push_back({});
        slot_stamp_.push_back(0);
        if (slots_.size() + 1 > fen_.size()) {
            // Grow the Fenwick tree: rebuild it from slot rates.
            std::vector<double> rates(slots_.size(), 0.0);
            for (size_t i = 0; i < slots_.size(); ++i)
                if (slots_[i].alive) rates[i] = slots_[i].rate;
            fw_resize(std::max<size_t>(64, slots_.size() * 2));
            for (size_t i = 0; i < rates.size(); ++i)
                if (rates[i] != 0) fw_add(i, rates[i]);
        }
    }
    Slot& s = slots_[id];
    s.cv = cv;
    s.rate = 0;
    s.alive = true;
    ++s.gen;
    by_key_[key] = id;
    ++alive_count_;
    set_rate(id, rate);
    uint32_t sites[4] = {cv.a, cv.b, cv.c, cv.d};
    uint32_t seen[4];
    size_t nseen = 0;
    for (uint32_t site : sites) {
        bool dup = false;
        for (size_t k = 0; k < nseen; ++k) dup |= (seen[k] == site);
        if (dup) continue;
        seen[nseen++] = site;
        if (site_index_.size() <= site) site_index_.resize(site + 1);
        site_index_[site].push_back({id, s.gen});
    }
}

void RateCatalog::set_rate(uint32_t id, double rate) {
    fw_add(id, rate - slots_[id].rate);
    slots_[id].rate = rate;
}

void RateCatalog::kill_slot(uint32_t id) {
    set_rate(id, 0.0);
    slots_[id].alive = false;
    by_key_.erase(key_of(slots_[id].cv));
    free_slots_.push_back(id);
    --alive_count_;
}

void RateCatalog::build(const OccupationState& st) {
    slots_.clear();
    slot_stamp_.clear();
    free_slots_.clear();
    by_key_.clear();
    site_index_.assign(st.site_count(), {});
    occupied_list_.clear();
    occupied_pos_.clear();
    alive_count_ = 0;
    fw_resize(64);
    for (uint32_t s : st.occupied_sites()) {
        occupied_pos_[s] = occupied_list_.size();
        occupied_list_.push_back(s);
    }
    for (const auto& ch : kernel_->enumerate_channels(st)) insert_channel(ch.cv, ch.rate);
}

void RateCatalog::sync_occupied(const OccupationState& st, uint32_t s) {
    bool occ = st.occupation(s) > 0;
    auto it = occupied_pos_.find(s);
    if (occ && it == occupied_pos_.end()) {
        occupied_pos_[s] = occupied_list_.size();
        occupied_list_.push_back(s);
    } else if (!occ && it != occupied_pos_.end()) {
        size_t pos = it->second;
        uint32_t last = occupied_list_.back();
        occupied_list_[pos] = last;
        occupied_pos_[last] = pos;
        occupied_list_.pop_back();
        occupied_pos_.erase(it);
    }
}

void RateCatalog::touch_site(const OccupationState& st, uint32_t s, uint64_t stamp) {
    if (site_index_.size() <= s) site_index_.resize(s + 1);
    auto& refs = site_index_[s];
    size_t keep = 0;
    for (const Ref& ref : refs) {
        const Slot& slot = slots_[ref.id];
        if (!slot.alive || slot.gen != ref.gen) continue;  // stale entry
        refs[keep++] = ref;
        if (slot_stamp_[ref.id] == stamp) continue;  // already updated this event
        slot_stamp_[ref.id] = stamp;
        double r = kernel_->rate(st, slot.cv);
        if (r > 0)
            set_rate(ref.id, r);
        else
            kill_slot(ref.id);
    }
    refs.resize(keep);
}

void RateCatalog::discover_sources(const OccupationState& st, uint32_t s) {
    std::vector<ChannelRate> found;
    kernel_->channels_for_source(st, s, occupied_list_, found);
    for (const auto& ch : found) insert_channel(ch.cv, ch.rate);
}

void RateCatalog::on_event(const OccupationState& st, const CollisionVector& cv) {
    ++event_stamp_;
    uint32_t sites[4] = {cv.a, cv.b, cv.c, cv.d};
    int64_t delta[4] = {-1, -1, +1, +1};
    uint32_t uniq[4];
    int64_t dtot[4];
    size_t nu = 0;
    for (size_t i = 0; i < 4; ++i) {
        bool merged = false;
        for (size_t k = 0; k < nu; ++k)
            if (uniq[k] == sites[i]) {
                dtot[k] += delta[i];
                merged = true;
            }
        if (!merged) {
            uniq[nu] = sites[i];
            dtot[nu] = delta[i];
            ++nu;
        }
    }
    for (size_t k = 0; k < nu; ++k) sync_occupied(st, uniq[k]);
    for (size_t k = 0; k < nu; ++k) touch_site(st, uniq[k], event_stamp_);
    for (size_t k = 0; k < nu; ++k) {
        int64_t now = st.occupation(uniq[k]);
        int64_t before = now - dtot[k];
        // Newly feasible as a collision source: 0 -> occupied, or 1 -> 2
        // (enabling the same-site pair).
        if ((before == 0 && now > 0) || (before == 1 && now >= 2))
            discover_sources(st, uniq[k]);
    }
}

void RateCatalog::on_loss(const OccupationState& st, uint32_t site) {
    ++event_stamp_;
    sync_occupied(st, site);
    touch_site(st, site, event_stamp_);
}

double RateCatalog::recompute_total(const OccupationState& st) const {
    double t = 0;
    for (const auto& ch : kernel_->enumerate_channels(st)) t += ch.rate;
    return t;
}

void RateCatalog::dump_csv(std::ostream& os, const OccupationState& st) const {
    os << "a,b,c,d,structural,occupation,rate\n";
    for (const auto& slot : slots_) {
        if (!slot.alive) continue;
        os << slot.cv.a << ',' << slot.cv.b << ',' << slot.cv.c << ',' << slot.cv.d << ','
           << kernel_->structural_factor(slot.cv) << ','
           << kernel_->occupation_factor(st, slot.cv) << ',' << slot.rate << '\n';
    }
}

}  // namespace qbme
