#pragma once

#include "scada/plant/plant.hpp"
#include "scada/plant/scenario.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace scada::plant {

enum class valve_id : std::uint8_t { pump1_valve, pump2_valve, drain_main, drain_secondary };
enum class sensor_id : std::uint8_t { ultrasound, discrete_0, discrete_1, discrete_2, discrete_3 };

/// Operator corrective action.
struct mitigation_action {
    enum class kind : std::uint8_t {
        stop_pump1,
        stop_pump2,
        start_pump,
        open_valve,
        close_valve,
        clear_scenario,
        reset_sensor,
    };

    kind type = kind::clear_scenario;
    int pump = 1;  ///< start_pump: 1 or 2
    valve_id valve = valve_id::pump1_valve;
    sensor_id sensor = sensor_id::ultrasound;

    bool operator==(const mitigation_action&) const = default;
};

std::string to_string(const mitigation_action& action);
std::string_view to_string(valve_id v);
std::string_view to_string(sensor_id s);
std::optional<valve_id> parse_valve(std::string_view text);
std::optional<sensor_id> parse_sensor(std::string_view text);

/// True when a scenario corrupts the given sensor.
bool scenario_affects(scenario_kind scenario, sensor_id sensor);

/// Apply an action to the latched actuator state and the injector. Actuator effects
/// hold for the next control cycle (see apply_override); clear_scenario always
/// restores Normal, reset_sensor does so only when the active scenario corrupts that sensor.
std::pair<plant_state, scenario_kind> apply_mitigation(const plant_state& state, scenario_kind injector,
                                                       const mitigation_action& action);

/// Force the actuator part of an action onto a PLC command. Non-actuator actions
/// leave the command unchanged.
actuator_command apply_override(const actuator_command& cmd, const mitigation_action& action);

}  // namespace scada::plant
