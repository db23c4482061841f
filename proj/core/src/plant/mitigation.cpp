#include "scada/plant/mitigation.hpp"

#include <array>

namespace scada::plant {

namespace {
constexpr std::array<std::string_view, 4> valve_ids{"pump1_valve", "pump2_valve", "drain_main", "drain_secondary"};
constexpr std::array<std::string_view, 5> sensor_ids{"ultrasound", "discrete_0", "discrete_1", "discrete_2",
                                                     "discrete_3"};
}  // namespace

std::string_view to_string(valve_id v) { return valve_ids[static_cast<std::size_t>(v)]; }
std::string_view to_string(sensor_id s) { return sensor_ids[static_cast<std::size_t>(s)]; }

std::optional<valve_id> parse_valve(std::string_view text) {
    for (std::size_t i = 0; i < valve_ids.size(); ++i) {
        if (valve_ids[i] == text) return static_cast<valve_id>(i);
    }
    return std::nullopt;
}

std::optional<sensor_id> parse_sensor(std::string_view text) {
    for (std::size_t i = 0; i < sensor_ids.size(); ++i) {
        if (sensor_ids[i] == text) return static_cast<sensor_id>(i);
    }
    return std::nullopt;
}

std::string to_string(const mitigation_action& action) {
    using k = mitigation_action::kind;
    switch (action.type) {
    case k::stop_pump1: return "stop_pump1";
    case k::stop_pump2: return "stop_pump2";
    case k::start_pump: return "start_pump(" + std::to_string(action.pump) + ")";
    case k::open_valve: return "open_valve(" + std::string(to_string(action.valve)) + ")";
    case k::close_valve: return "close_valve(" + std::string(to_string(action.valve)) + ")";
    case k::clear_scenario: return "clear_scenario";
    case k::reset_sensor: return "reset_sensor(" + std::string(to_string(action.sensor)) + ")";
    }
    return "unknown";
}

bool scenario_affects(scenario_kind scenario, sensor_id sensor) {
    using sk = scenario_kind;
    switch (scenario) {
    case sk::normal:
    case sk::dos: return false;
    case sk::discrete_sensor_1_failure: return sensor == sensor_id::discrete_1;
    case sk::discrete_sensor_2_failure: return sensor == sensor_id::discrete_2;
    case sk::hit_low:
    case sk::hit_medium:
    case sk::hit_high: return true;
    default: return sensor == sensor_id::ultrasound;
    }
}

actuator_command apply_override(const actuator_command& cmd, const mitigation_action& action) {
    using k = mitigation_action::kind;
    actuator_command out = cmd;
    auto set_valve = [&out](valve_id v, bool open) {
        switch (v) {
        case valve_id::pump1_valve: out.pump1_valve_open = open; break;
        case valve_id::pump2_valve: out.pump2_valve_open = open; break;
        case valve_id::drain_main: out.drain_main_open = open; break;
        case valve_id::drain_secondary: out.drain_secondary_open = open; break;
        }
    };
    switch (action.type) {
    case k::stop_pump1: out.pump1_on = false; break;
    case k::stop_pump2: out.pump2_on = false; break;
    case k::start_pump:
        if (action.pump == 1) {
            out.pump1_on = out.pump1_valve_open = true;
        } else if (action.pump == 2) {
            out.pump2_on = out.pump2_valve_open = true;
        }
        break;
    case k::open_valve: set_valve(action.valve, true); break;
    case k::close_valve: set_valve(action.valve, false); break;
    case k::clear_scenario:
    case k::reset_sensor: break;
    }
    return out;
}

std::pair<plant_state, scenario_kind> apply_mitigation(const plant_state& state, scenario_kind injector,
                                                       const mitigation_action& action) {
    using k = mitigation_action::kind;
    const actuator_command cmd = apply_override(command_of(state), action);
    plant_state next = state;
    next.pump1_on = cmd.pump1_on;
    next.pump2_on = cmd.pump2_on;
    next.pump1_valve_open = cmd.pump1_valve_open;
    next.pump2_valve_open = cmd.pump2_valve_open;
    next.drain_main_open = cmd.drain_main_open;
    next.drain_secondary_open = cmd.drain_secondary_open;

    if (action.type == k::clear_scenario) {
        injector = scenario_kind::normal;
    } else if (action.type == k::reset_sensor && scenario_affects(injector, action.sensor)) {
        injector = scenario_kind::normal;
    }
    return {next, injector};
}

}  // namespace scada::plant
