#include "scada/plant/loop.hpp"

#include <cmath>

namespace scada::plant {

closed_loop::closed_loop(plant_params params, std::uint64_t seed, scenario_model_config models)
    : params_(params), injector_(seed, models) {
    params_.validate();
    state_ = initial_state(params_, seed);
    last_truth_ = read_true_sensors(state_, params_);
    cmd_ = plc_control(last_truth_, command_of(state_), params_);
    channel_.publish(modbus::encode_registers(last_truth_, cmd_));
}

cycle_result closed_loop::tick() {
    cycle_result out;

    // Operator requests queued since the previous cycle take effect now.
    if (pending_scenario_) {
        injector_.start(*pending_scenario_, last_truth_, state_.t_s);
        out.injected = pending_scenario_;
        pending_scenario_.reset();
    }
    std::vector<mitigation_action> actions;
    actions.swap(pending_actions_);
    for (const auto& a : actions) {
        auto [s, kind] = apply_mitigation(state_, injector_.active(), a);
        if (kind != injector_.active()) injector_.clear();
        out.applied.push_back(a);
    }
    for (const auto& a : actions) cmd_ = apply_override(cmd_, a);

    ++tick_;
    state_ = step(state_, params_, cmd_, params_.poll_dt_s);
    // Keep the clock on the poll grid.
    state_.t_s = static_cast<double>(tick_) * params_.poll_dt_s;

    out.truth = read_true_sensors(state_, params_);
    out.sensed = injector_.apply(out.truth);
    cmd_ = plc_control(out.sensed, cmd_, params_);
    // Operator overrides also win over this cycle's PLC output.
    for (const auto& a : actions) cmd_ = apply_override(cmd_, a);
    last_truth_ = out.truth;

    out.tick = tick_;
    out.state = state_;
    out.command = cmd_;
    out.registers = modbus::encode_registers(out.sensed, cmd_);
    channel_.publish(out.registers);
    return out;
}

}  // namespace scada::plant
