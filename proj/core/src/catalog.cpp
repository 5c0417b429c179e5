#include "qbme/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace qbme {

ModeCatalog ModeCatalog::box(int64_t e_max, int64_t max_modes) {
    if (e_max < 0) throw std::invalid_argument("box catalog: e_max must be >= 0");
    ModeCatalog c;
    c.geometry_ = Geometry::Box;
    c.mode_budget_ = max_modes;
    c.extend_box(e_max);
    return c;
}

ModeCatalog ModeCatalog::oscillator(int64_t j_max, int64_t max_shells) {
    if (j_max < 0) throw std::invalid_argument("oscillator catalog: j_max must be >= 0");
    ModeCatalog c;
    c.geometry_ = Geometry::Oscillator;
    c.mode_budget_ = max_shells;
    c.extend_oscillator(j_max);
    return c;
}

void ModeCatalog::ensure_energy(int64_t e) {
    if (e <= e_max_) return;
    if (geometry_ == Geometry::Box)
        extend_box(e);
    else
        extend_oscillator(e);
}

void ModeCatalog::extend_box(int64_t new_e_max) {
    // Rough count of lattice points in the ball, to fail early on absurd cutoffs.
    double est = 4.19 * std::pow(double(new_e_max) + 1.0, 1.5) + 8;
    if (est > double(mode_budget_))
        throw CapacityError("box catalog would exceed the mode budget");

    const int64_t r = int64_t(std::sqrt(double(new_e_max))) + 1;
    std::vector<BoxMode> fresh;
    for (int mx = int(-r); mx <= r; ++mx)
        for (int my = int(-r); my <= r; ++my)
            for (int mz = int(-r); mz <= r; ++mz) {
                BoxMode mode{{mx, my, mz}};
                int64_t e = mode.energy();
                if (e > e_max_ && e <= new_e_max) fresh.push_back(mode);
            }
    std::sort(fresh.begin(), fresh.end(), [](const BoxMode& a, const BoxMode& b) {
        if (a.energy() != b.energy()) return a.energy() < b.energy();
        return a.m < b.m;
    });

    block_by_energy_.resize(size_t(new_e_max) + 1, -1);
    for (size_t i = 0; i < fresh.size();) {
        size_t j = i;
        while (j < fresh.size() && fresh[j].energy() == fresh[i].energy()) ++j;
        EnergyBlock b;
        b.energy = fresh[i].energy();
        b.degeneracy = int64_t(j - i);
        b.first_mode = uint32_t(modes_.size());
        block_by_energy_[size_t(b.energy)] = int32_t(blocks_.size());
        for (size_t k = i; k < j; ++k) {
            modes_.push_back(fresh[k]);
            mode_block_.push_back(uint32_t(blocks_.size()));
        }
        blocks_.push_back(b);
        i = j;
    }
    e_max_ = new_e_max;
}

void ModeCatalog::extend_oscillator(int64_t new_j_max) {
    if (new_j_max + 1 > mode_budget_)
        throw CapacityError("oscillator catalog would exceed the shell budget");
    block_by_energy_.resize(size_t(new_j_max) + 1, -1);
    for (int64_t j = e_max_ + 1; j <= new_j_max; ++j) {
        EnergyBlock b;
        b.energy = j;
        b.degeneracy = osc_shell_degeneracy(j);
        block_by_energy_[size_t(j)] = int32_t(blocks_.size());
        blocks_.push_back(b);
    }
    e_max_ = new_j_max;
}

int ModeCatalog::block_at_energy(int64_t e) const {
    if (e < 0 || e > e_max_) return -1;
    return block_by_energy_[size_t(e)];
}

uint32_t ModeCatalog::block_of_mode(uint32_t mode_index) const {
    if (mode_index >= mode_block_.size())
        throw std::out_of_range("block_of_mode: invalid mode index");
    return mode_block_[mode_index];
}

int64_t ModeCatalog::mode_index(const BoxMode& m) const {
    int64_t e = m.energy();
    int b = block_at_energy(e);
    if (b < 0) return -1;
    const EnergyBlock& blk = blocks_[size_t(b)];
    auto first = modes_.begin() + blk.first_mode;
    auto last = first + blk.degeneracy;
    auto it = std::lower_bound(first, last, m, [](const BoxMode& a, const BoxMode& b2) {
        return a.m < b2.m;
    });
    if (it == last || !(*it == m)) return -1;
    return it - modes_.begin();
}

int64_t ModeCatalog::state_count() const {
    if (geometry_ == Geometry::Box) return int64_t(modes_.size());
    int64_t total = 0;
    for (const auto& b : blocks_) total += b.degeneracy;
    return total;
}

void ModeCatalog::dump_csv(std::ostream& os) const {
    os << "index,block,e,g,mx,my,mz\n";
    if (geometry_ == Geometry::Box) {
        for (size_t i = 0; i < modes_.size(); ++i) {
            const auto& m = modes_[i];
            uint32_t b = mode_block_[i];
            os << i << ',' << b << ',' << m.energy() << ',' << blocks_[b].degeneracy << ','
               << m.m[0] << ',' << m.m[1] << ',' << m.m[2] << '\n';
        }
    } else {
        for (size_t b = 0; b < blocks_.size(); ++b)
            os << b << ',' << b << ',' << blocks_[b].energy << ',' << blocks_[b].degeneracy
               << ",,,\n";
    }
}

}  // namespace qbme
