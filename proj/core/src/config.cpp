#include "qbme/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "qbme/equilibrium.hpp"

namespace qbme {

PhysicsMode parse_mode(const std::string& s) {
    if (s == "box-nonergodic") return PhysicsMode::BoxNonErgodic;
    if (s == "box-ergodic") return PhysicsMode::BoxErgodic;
    if (s == "osc-ergodic") return PhysicsMode::OscErgodic;
    throw ConfigError("unknown mode '" + s + "'");
}

const char* mode_name(PhysicsMode m) {
    switch (m) {
        case PhysicsMode::BoxNonErgodic: return "box-nonergodic";
        case PhysicsMode::BoxErgodic: return "box-ergodic";
        case PhysicsMode::OscErgodic: return "osc-ergodic";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

int64_t to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int64_t x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not an integer: '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not a number: '" + v + "'");
    }
}

InitSpec::Kind parse_init(const std::string& s) {
    if (s == "gaussian") return InitSpec::Kind::GaussianLike;
    if (s == "thermal") return InitSpec::Kind::ThermalLike;
    if (s == "explicit") return InitSpec::Kind::Explicit;
    throw ConfigError("unknown init '" + s + "'");
}

void apply_key(RunPlan& p, const std::string& key, const std::string& v) {
    auto ramp = [&]() -> EvaporationRamp& {
        if (!p.ramp) p.ramp.emplace();
        return *p.ramp;
    };
    if (key == "name") p.name = v;
    else if (key == "mode") p.mode = parse_mode(v);
    else if (key == "particles") p.particles = to_int(key, v);
    else if (key == "energy") p.energy = to_int(key, v);
    else if (key == "t-over-tc") p.t_over_tc = to_double(key, v);
    else if (key == "init") p.init = parse_init(v);
    else if (key == "trajectories") p.trajectories = int(to_int(key, v));
    else if (key == "seed") p.seed = uint64_t(to_int(key, v));
    else if (key == "t-end") p.t_end = to_double(key, v);
    else if (key == "sample-interval") p.sample_interval = to_double(key, v);
    else if (key == "burnin-fraction") p.burnin_fraction = to_double(key, v);
    else if (key == "max-events") p.max_events = uint64_t(to_int(key, v));
    else if (key == "rebuild-period") p.rebuild_period = uint64_t(to_int(key, v));
    else if (key == "series-blocks") p.series_blocks = size_t(to_int(key, v));
    else if (key == "record-event-times") p.record_event_times = to_int(key, v) != 0;
    else if (key == "ramp.e-b0") ramp().e_b0 = to_int(key, v);
    else if (key == "ramp.e-l") ramp().e_l = to_int(key, v);
    else if (key == "ramp.gamma") ramp().gamma = to_double(key, v);
    else throw ConfigError("unknown key '" + key + "'");
}

}  // namespace

RunPlan parse_config_text(const std::string& text) {
    RunPlan p;
    std::string body = trim(text);
    if (!body.empty() && body[0] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("JSON parse error: ") + e.what());
        }
        std::function<void(const nlohmann::json&, const std::string&)> walk =
            [&](const nlohmann::json& obj, const std::string& prefix) {
                for (auto it = obj.begin(); it != obj.end(); ++it) {
                    std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
                    if (it->is_null()) {
                        continue;  // explicit null: leave the default
                    } else if (it->is_object()) {
                        walk(*it, key);
                    } else if (it->is_string()) {
                        apply_key(p, key, it->get<std::string>());
                    } else {
                        std::ostringstream os;
                        os << *it;
                        apply_key(p, key, os.str());
                    }
                }
            };
        walk(j, "");
        validate(p);
        return p;
    }

    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (!section.empty()) key = section + "." + key;
        apply_key(p, key, value);
    }
    validate(p);
    return p;
}

RunPlan parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void validate(const RunPlan& p) {
    if (p.particles < 1) throw ConfigError("key 'particles': need N >= 1");
    if (p.energy < 0 && p.t_over_tc <= 0)
        throw ConfigError("key 'energy': need energy >= 0 or t-over-tc > 0");
    if (p.energy >= 0 && p.t_over_tc > 0)
        throw ConfigError("key 't-over-tc': exclusive with explicit energy");
    if (p.trajectories < 1) throw ConfigError("key 'trajectories': need >= 1");
    if (p.t_end <= 0 && p.max_events == 0)
        throw ConfigError("key 't-end': need t-end > 0 or max-events > 0");
    if (p.burnin_fraction < 0 || p.burnin_fraction >= 1)
        throw ConfigError("key 'burnin-fraction': need [0, 1)");
    if (p.ramp) {
        if (p.ramp->gamma <= 0) throw ConfigError("key 'ramp.gamma': need > 0");
        if (p.ramp->e_l < 0 || p.ramp->e_b0 <= p.ramp->e_l)
            throw ConfigError("key 'ramp.e-b0': need e-b0 > e-l >= 0");
        if (!is_ergodic(p.mode))
            throw ConfigError("key 'ramp.gamma': evaporation needs an ergodic mode");
    }
}

int64_t resolve_energy(ModeCatalog& catalog, const RunPlan& plan) {
    if (plan.energy >= 0) return plan.energy;
    double tc = critical_temperature(catalog.geometry(), double(plan.particles));
    double T = plan.t_over_tc * tc;
    catalog.ensure_energy(int64_t(std::ceil(30.0 * T)) + 10);
    double e = energy_for_temperature(catalog, double(plan.particles), T);
    return std::llround(e);
}

std::string canonical_text(const RunPlan& p) {
    std::ostringstream os;
    os.precision(17);
    os << "name=" << p.name << '\n'
       << "mode=" << mode_name(p.mode) << '\n'
       << "particles=" << p.particles << '\n'
       << "energy=" << p.energy << '\n'
       << "t-over-tc=" << p.t_over_tc << '\n'
       << "init=" << int(p.init) << '\n'
       << "trajectories=" << p.trajectories << '\n'
       << "seed=" << p.seed << '\n'
       << "t-end=" << p.t_end << '\n'
       << "sample-interval=" << p.sample_interval << '\n'
       << "burnin-fraction=" << p.burnin_fraction << '\n'
       << "max-events=" << p.max_events << '\n'
       << "rebuild-period=" << p.rebuild_period << '\n'
       << "series-blocks=" << p.series_blocks << '\n'
       << "record-event-times=" << int(p.record_event_times) << '\n';
    if (p.ramp)
        os << "ramp.e-b0=" << p.ramp->e_b0 << '\n'
           << "ramp.e-l=" << p.ramp->e_l << '\n'
           << "ramp.gamma=" << p.ramp->gamma << '\n';
    return os.str();
}

RunPlan preset_plan(const std::string& name) {
    RunPlan p;
    p.name = name;
    if (name == "fig1-box-N100" || name == "fig1-box-N500") {
        p.mode = PhysicsMode::BoxNonErgodic;
        p.particles = std::stoll(name.substr(name.rfind('N') + 1));
        p.t_over_tc = 0.5;
        p.t_end = 2.0;
        p.trajectories = 2;
    } else if (name == "fig10-osc-N300" || name == "fig10-osc-N500") {
        p.mode = PhysicsMode::OscErgodic;
        p.particles = std::stoll(name.substr(name.rfind('N') + 1));
        p.t_over_tc = 0.5;
        p.t_end = 2.0;
        p.trajectories = 2;
    } else if (name == "fig7-fluct") {
        p.mode = PhysicsMode::BoxErgodic;
        p.particles = 500;
        p.t_over_tc = 0.4;
        p.t_end = 4.0;
    } else if (name == "fig8-growth") {
        p.mode = PhysicsMode::BoxErgodic;
        p.particles = 500;
        p.t_over_tc = 0.5;
        p.t_end = 0.02;
        p.sample_interval = 0.0001;
        p.burnin_fraction = 0;
    } else if (name == "fig3-collision") {
        p.mode = PhysicsMode::BoxErgodic;
        p.particles = 100;
        p.t_over_tc = 1.5;
        p.t_end = 5.0;
    } else if (name == "ergodization") {
        p.mode = PhysicsMode::BoxNonErgodic;
        p.particles = 500;
        p.t_over_tc = 0.4;
        p.t_end = 2.0;
    } else if (name == "fig13-evap" || name == "fig15-ramp-scan") {
        p.mode = PhysicsMode::OscErgodic;
        p.particles = 800;
        p.t_over_tc = 1.4;
        p.t_end = 40.0;
        p.sample_interval = 0.05;
        p.record_event_times = true;
        p.ramp = EvaporationRamp{65, 8, name == "fig13-evap" ? 0.5 : 0.1};
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    validate(p);
    return p;
}

}  // namespace qbme
