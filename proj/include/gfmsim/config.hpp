#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gfmsim/control.hpp"
#include "gfmsim/frames.hpp"
#include "gfmsim/limiter.hpp"
#include "gfmsim/plant.hpp"

namespace gfmsim {

/// Configuration parse or validation failure; the message names the offending
/// line or field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimSettings {
    double duration = 8.0; // s of simulated time after the warm-up
    double dt = 5e-5;      // s, shared by plant and control
    double warmup = 2.0;   // s simulated before t = 0 with events disabled
    int decimation = 10;   // record every n-th step
};

/// Full experiment description, as loaded from an INI-style scenario file.
struct ScenarioConfig {
    std::string name = "scenario";
    PerUnitBase base{};
    PlantParams plant{};
    double v_grid_mag = 1.0;
    ControlParams control{};
    LimiterParams limiter{};
    Strategy strategy = Strategy::Htva;
    std::vector<GridEvent> events;
    SimSettings sim{};

    void validate() const;
};

/// One `--set section.key=value` style override. Event components are
/// addressable as events.eventN.time and events.eventN.arg.
struct ConfigOverride {
    std::string key;
    std::string value;
};

ScenarioConfig load_config(const std::string& text, const std::string& name = "scenario",
                           const std::vector<ConfigOverride>& overrides = {});
ScenarioConfig load_config_file(const std::string& path,
                                const std::vector<ConfigOverride>& overrides = {});

/// Canonical dump of a resolved configuration; reloadable through load_config.
std::string dump_config(const ScenarioConfig& cfg);

const std::vector<std::string>& preset_names();
const std::string& preset_text(const std::string& name);
ScenarioConfig load_preset(const std::string& name,
                           const std::vector<ConfigOverride>& overrides = {});

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

} // namespace gfmsim
