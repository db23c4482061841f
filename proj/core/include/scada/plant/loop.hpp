#pragma once

#include "scada/modbus/poller.hpp"
#include "scada/modbus/registers.hpp"
#include "scada/plant/injector.hpp"
#include "scada/plant/mitigation.hpp"
#include "scada/plant/plant.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace scada::plant {

/// Everything one control cycle produced.
struct cycle_result {
    std::uint64_t tick = 0;
    plant_state state;        ///< true plant after the step
    sensor_reading truth;     ///< what the instruments would report
    sensor_reading sensed;    ///< what reached the PLC after scenario corruption
    actuator_command command; ///< PLC output (with any operator override) for the next step
    modbus::register_file registers;
    std::vector<mitigation_action> applied;
    std::optional<scenario_kind> injected;
};

/// The closed control loop: step -> read sensors -> inject -> PLC -> encode -> publish.
/// Owns the plant state; operator requests are queued and take effect at the next cycle.
class closed_loop {
public:
    closed_loop(plant_params params, std::uint64_t seed, scenario_model_config models = {});

    cycle_result tick();

    void request_scenario(scenario_kind kind) { pending_scenario_ = kind; }
    void request_mitigation(const mitigation_action& action) { pending_actions_.push_back(action); }

    const plant_state& state() const { return state_; }
    const actuator_command& command() const { return cmd_; }
    scenario_kind scenario() const { return injector_.active(); }
    const plant_params& params() const { return params_; }
    std::uint64_t ticks() const { return tick_; }

    /// Latest published registers; feed a poller or a Modbus server from here.
    const modbus::snapshot_channel& channel() const { return channel_; }

private:
    plant_params params_;
    plant_state state_;
    actuator_command cmd_;
    scenario_injector injector_;
    sensor_reading last_truth_;
    modbus::snapshot_channel channel_;
    std::uint64_t tick_ = 0;
    std::optional<scenario_kind> pending_scenario_;
    std::vector<mitigation_action> pending_actions_;
};

}  // namespace scada::plant
