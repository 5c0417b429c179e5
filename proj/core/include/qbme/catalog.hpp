#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qbme {

enum class Geometry { Box, Oscillator };

/// One momentum mode of the periodic box, k = (2*pi/L) m.  The energy in
/// units of the level spacing is |m|^2, kept as exact integer arithmetic.
struct BoxMode {
    std::array<int, 3> m{0, 0, 0};

    int64_t energy() const {
        return int64_t(m[0]) * m[0] + int64_t(m[1]) * m[1] + int64_t(m[2]) * m[2];
    }
    bool operator==(const BoxMode&) const = default;
};

/// Set of degenerate one-particle states sharing a common energy.
struct EnergyBlock {
    int64_t energy = 0;       // integer, units of the level spacing
    int64_t degeneracy = 0;   // member count g
    uint32_t first_mode = 0;  // box only: range into the mode table
};

/// Unit conventions shared by the rest of the simulator.  Energies are exact
/// integers in units of the level spacing (box: 2 pi^2 hbar^2 / (m L^2),
/// oscillator: hbar omega).  Times are reals in units of the reference time
/// 1/R with R = sigma*nbar*v1*2/N (box) or sigma*nbar0_h*v0*2/N (oscillator).
struct UnitSystem {
    Geometry geometry = Geometry::Box;
};

class CapacityError : public std::exception {
  public:
    explicit CapacityError(std::string what) : what_(std::move(what)) {}
    const char* what() const noexcept override { return what_.c_str(); }

  private:
    std::string what_;
};

/// One-particle state space for a trap geometry: energy blocks sorted by
/// energy, and (for the box) the individual momentum modes grouped by block.
/// Extension is append-only, so indices are stable; callers typically extend
/// once up front to cover the total energy of the gas, after which the
/// catalog is read-only and safe to share between trajectories.
class ModeCatalog {
  public:
    static ModeCatalog box(int64_t e_max, int64_t max_modes = kDefaultModeBudget);
    static ModeCatalog oscillator(int64_t j_max, int64_t max_shells = kDefaultShellBudget);

    Geometry geometry() const { return geometry_; }
    int64_t energy_limit() const { return e_max_; }

    size_t block_count() const { return blocks_.size(); }
    const EnergyBlock& block(size_t i) const { return blocks_.at(i); }
    const std::vector<EnergyBlock>& blocks() const { return blocks_; }

    /// Block holding states of the given energy; -1 if no state has it
    /// (box energies of the form 4^a(8b+7) are not sums of three squares).
    int block_at_energy(int64_t e) const;

    // Box mode access.
    size_t mode_count() const { return modes_.size(); }
    const BoxMode& mode(uint32_t i) const { return modes_.at(i); }
    uint32_t block_of_mode(uint32_t mode_index) const;
    /// Index of a mode by its quantum numbers; -1 if outside the catalog.
    int64_t mode_index(const BoxMode& m) const;

    /// Total number of one-particle states with energy <= energy_limit().
    int64_t state_count() const;

    /// Grow the catalog so every state with energy <= e exists.  Append-only:
    /// existing indices are untouched.
    void ensure_energy(int64_t e);

    void dump_csv(std::ostream& os) const;

    static constexpr int64_t kDefaultModeBudget = 40'000'000;
    static constexpr int64_t kDefaultShellBudget = 2'000'000;

  private:
    ModeCatalog() = default;
    void extend_box(int64_t new_e_max);
    void extend_oscillator(int64_t new_j_max);

    Geometry geometry_ = Geometry::Box;
    int64_t e_max_ = -1;
    int64_t mode_budget_ = kDefaultModeBudget;
    std::vector<EnergyBlock> blocks_;
    std::vector<int32_t> block_by_energy_;  // energy -> block index, -1 if absent
    // Box only.
    std::vector<BoxMode> modes_;
    std::vector<uint32_t> mode_block_;
};

/// Oscillator shell degeneracy (j+1)(j+2)/2.
inline int64_t osc_shell_degeneracy(int64_t j) { return (j + 1) * (j + 2) / 2; }

}  // namespace qbme
