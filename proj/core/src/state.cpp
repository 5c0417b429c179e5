#include "qbme/state.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace qbme {

OccupationState::OccupationState(const ModeCatalog& catalog, bool ergodic)
    : catalog_(&catalog), ergodic_(ergodic) {
    if (catalog.geometry() == Geometry::Oscillator && !ergodic)
        throw std::invalid_argument("oscillator runs use the ergodic representation");
}

size_t OccupationState::site_count() const {
    return ergodic_ ? catalog_->block_count() : catalog_->mode_count();
}

int64_t OccupationState::site_energy(uint32_t site) const {
    if (ergodic_) return catalog_->block(site).energy;
    return catalog_->mode(site).energy();
}

int64_t OccupationState::site_degeneracy(uint32_t site) const {
    return ergodic_ ? catalog_->block(site).degeneracy : 1;
}

void OccupationState::bump(uint32_t site, int64_t delta) {
    if (site >= site_count()) throw std::out_of_range("occupation site out of range");
    if (occ_.size() <= site) occ_.resize(site_count(), 0);
    occ_[site] += delta;
    if (occ_[site] < 0) throw std::logic_error("occupation went negative");
}

void OccupationState::add_particles(uint32_t site, int64_t count) {
    bump(site, count);
    n_total_ += count;
    e_total_ += count * site_energy(site);
    if (!ergodic_ && catalog_->geometry() == Geometry::Box) {
        const auto& m = catalog_->mode(site).m;
        for (int k = 0; k < 3; ++k) p_total_[size_t(k)] += count * m[size_t(k)];
    }
}

void OccupationState::remove_particle(uint32_t site) { add_particles(site, -1); }

void OccupationState::apply(const CollisionVector& cv) {
    int64_t ea = site_energy(cv.a), eb = site_energy(cv.b);
    int64_t ec = site_energy(cv.c), ed = site_energy(cv.d);
    if (ea + eb != ec + ed)
        throw std::logic_error("collision does not conserve energy");
    if (cv.a == cv.b) {
        if (occupation(cv.a) < 2) throw std::logic_error("collision needs two particles in source");
    } else if (occupation(cv.a) < 1 || occupation(cv.b) < 1) {
        throw std::logic_error("collision source unoccupied");
    }
    if (!ergodic_ && catalog_->geometry() == Geometry::Box) {
        const auto& ma = catalog_->mode(cv.a).m;
        const auto& mb = catalog_->mode(cv.b).m;
        const auto& mc = catalog_->mode(cv.c).m;
        const auto& md = catalog_->mode(cv.d).m;
        for (size_t k = 0; k < 3; ++k)
            if (ma[k] + mb[k] != mc[k] + md[k])
                throw std::logic_error("collision does not conserve momentum");
    }
    bump(cv.a, -1);
    bump(cv.b, -1);
    bump(cv.c, +1);
    bump(cv.d, +1);
}

std::vector<uint32_t> OccupationState::occupied_sites() const {
    std::vector<uint32_t> out;
    for (uint32_t i = 0; i < occ_.size(); ++i)
        if (occ_[i] > 0) out.push_back(i);
    return out;
}

void OccupationState::recompute_totals(int64_t& n, int64_t& e,
                                       std::array<int64_t, 3>& p) const {
    n = 0;
    e = 0;
    p = {0, 0, 0};
    for (uint32_t i = 0; i < occ_.size(); ++i) {
        if (occ_[i] == 0) continue;
        n += occ_[i];
        e += occ_[i] * site_energy(i);
        if (!ergodic_ && catalog_->geometry() == Geometry::Box) {
            const auto& m = catalog_->mode(i).m;
            for (size_t k = 0; k < 3; ++k) p[k] += occ_[i] * m[k];
        }
    }
}

void OccupationState::dump_csv(std::ostream& os, uint64_t seed, uint64_t events) const {
    os << "# N=" << n_total_ << " E=" << e_total_ << " seed=" << seed
       << " events=" << events << '\n';
    os << "block,site,occupation\n";
    for (uint32_t i = 0; i < occ_.size(); ++i) {
        if (occ_[i] == 0) continue;
        uint32_t b = ergodic_ ? i : catalog_->block_of_mode(i);
        os << b << ',' << i << ',' << occ_[i] << '\n';
    }
}

namespace {

// Random particle, weighted by occupation.
uint32_t pick_particle_site(const OccupationState& st, Rng& rng) {
    int64_t r = int64_t(rng.below(uint64_t(st.particles())));
    for (uint32_t i = 0;; ++i) {
        r -= st.occupation(i);
        if (r < 0) return i;
    }
}

// Nearest representable energy to ep+d strictly improving |E - target|.
// Returns -1 if no such level exists.  lo is the lowest admissible energy.
int64_t best_destination_energy(ModeCatalog& catalog, int64_t ep, int64_t d, int64_t lo) {
    if (d > 0) {
        catalog.ensure_energy(ep + d);
        for (int64_t e = ep + d; e > ep; --e)
            if (catalog.block_at_energy(e) >= 0) return e;
    } else {
        for (int64_t e = std::max(ep + d, lo); e < ep; ++e)
            if (catalog.block_at_energy(e) >= 0) return e;
    }
    return -1;
}

uint32_t site_in_block(const ModeCatalog& catalog, bool ergodic, int block, Rng& rng) {
    if (ergodic) return uint32_t(block);
    const auto& b = catalog.block(size_t(block));
    return b.first_mode + uint32_t(rng.below(uint64_t(b.degeneracy)));
}

// Move particles one at a time toward the energy target until it is met.
void repair_energy(ModeCatalog& catalog, OccupationState& st, int64_t target,
                   bool avoid_ground, Rng& rng) {
    int64_t lo = avoid_ground ? 1 : 0;
    int64_t failures = 0;
    int64_t guard = 0;
    while (st.energy() != target) {
        if (++guard > 64 * st.particles() + 100000)
            throw InitError("energy repair loop did not converge");
        int64_t d = target - st.energy();
        uint32_t s = pick_particle_site(st, rng);
        int64_t ep = st.site_energy(s);
        int64_t dest = best_destination_energy(catalog, ep, d, lo);
        if (dest < 0) {
            if (++failures > 4 * st.particles()) {
                if (lo == 1) {  // admit the ground state as a last resort
                    lo = 0;
                    failures = 0;
                    continue;
                }
                throw InitError("requested (N,E) not reachable by single-particle moves");
            }
            continue;
        }
        failures = 0;
        uint32_t to = site_in_block(catalog, st.ergodic(), catalog.block_at_energy(dest), rng);
        st.remove_particle(s);
        st.add_particles(to, 1);
    }
}

}  // namespace

OccupationState init_from_spec(ModeCatalog& catalog, bool ergodic, const InitSpec& spec,
                               Rng& rng) {
    OccupationState st(catalog, ergodic);

    if (spec.kind == InitSpec::Kind::Explicit) {
        for (auto [site, count] : spec.occupations) st.add_particles(site, count);
        if (spec.particles && st.particles() != spec.particles)
            throw InitError("explicit occupations do not match requested N");
        if (st.energy() != spec.energy && spec.energy)
            throw InitError("explicit occupations do not match requested E");
        return st;
    }

    if (spec.particles < 1) throw InitError("need at least one particle");
    if (spec.energy < 0) throw InitError("energy target must be nonnegative");

    if (spec.kind == InitSpec::Kind::GaussianLike) {
        // Random placement between the first excited level and twice the mean
        // energy, then exact repair.
        int64_t e1 = 1;
        int64_t e_hi = std::max<int64_t>(2 * spec.energy / spec.particles, e1);
        catalog.ensure_energy(std::max(e_hi, std::min<int64_t>(spec.energy, e_hi + 4)));
        std::vector<uint32_t> eligible_blocks;
        int64_t weight = 0;
        for (size_t b = 0; b < catalog.block_count(); ++b) {
            int64_t e = catalog.block(b).energy;
            if (e >= e1 && e <= e_hi) {
                eligible_blocks.push_back(uint32_t(b));
                weight += catalog.block(b).degeneracy;
            }
        }
        if (eligible_blocks.empty())
            throw InitError("no eligible levels for the requested (N,E)");
        for (int64_t i = 0; i < spec.particles; ++i) {
            int64_t r = int64_t(rng.below(uint64_t(weight)));
            for (uint32_t b : eligible_blocks) {
                r -= catalog.block(b).degeneracy;
                if (r < 0) {
                    st.add_particles(site_in_block(catalog, ergodic, int(b), rng), 1);
                    break;
                }
            }
        }
        repair_energy(catalog, st, spec.energy, spec.avoid_ground, rng);
        return st;
    }

    // ThermalLike: sample block per particle from the profile, repair E.
    if (spec.block_profile.empty()) throw InitError("thermal init needs a block profile");
    double total = 0;
    for (double w : spec.block_profile) {
        if (w < 0) throw InitError("profile weights must be nonnegative");
        total += w;
    }
    if (total <= 0) throw InitError("profile weights sum to zero");
    if (spec.block_profile.size() > catalog.block_count())
        throw InitError("profile has more blocks than the catalog");
    for (int64_t i = 0; i < spec.particles; ++i) {
        double r = rng.unit() * total;
        size_t b = 0;
        for (; b + 1 < spec.block_profile.size(); ++b) {
            r -= spec.block_profile[b];
            if (r < 0) break;
        }
        st.add_particles(site_in_block(catalog, ergodic, int(b), rng), 1);
    }
    repair_energy(catalog, st, spec.energy, false, rng);
    return st;
}

}  // namespace qbme
