#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "qbme/engine.hpp"

namespace qbme {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One ensemble: a single physical setup run over many seeded trajectories.
struct RunPlan {
    std::string name = "run";
    PhysicsMode mode = PhysicsMode::BoxNonErgodic;
    int64_t particles = 0;
    int64_t energy = -1;     ///< exact integer total energy, or
    double t_over_tc = 0;    ///< temperature target translated to E
    InitSpec::Kind init = InitSpec::Kind::GaussianLike;
    int trajectories = 1;
    uint64_t seed = 1;
    double t_end = 0;
    double sample_interval = 0;
    double burnin_fraction = 0.5;  ///< of t_end, for time averages
    uint64_t max_events = 0;
    uint64_t rebuild_period = 100000;
    size_t series_blocks = 0;
    bool record_event_times = false;
    std::optional<EvaporationRamp> ramp;
};

/// Key=value / INI file, or JSON when the file starts with '{'.
/// Unknown keys are rejected.
RunPlan parse_config_file(const std::string& path);
RunPlan parse_config_text(const std::string& text);

/// Named experiment presets (fig1-box-N100, fig1-box-N500, fig10-osc-N300,
/// fig10-osc-N500, fig7-fluct, fig8-growth, fig13-evap, fig15-ramp-scan,
/// fig3-collision, ergodization).
RunPlan preset_plan(const std::string& name);

/// Resolve t_over_tc to an exact integer energy (rounded), extending the
/// catalog as needed.  Returns plan.energy when set explicitly.
int64_t resolve_energy(ModeCatalog& catalog, const RunPlan& plan);

/// Validate physics consistency; throws ConfigError naming the offending key.
void validate(const RunPlan& plan);

/// Canonical serialization (used for the manifest config hash).
std::string canonical_text(const RunPlan& plan);

PhysicsMode parse_mode(const std::string& s);
const char* mode_name(PhysicsMode m);

}  // namespace qbme
