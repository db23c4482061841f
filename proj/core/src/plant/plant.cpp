#include "scada/plant/plant.hpp"

#include "scada/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace scada::plant {

void plant_params::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw validation_error(std::string("plant params: ") + what);
    };
    require(main_capacity_l > 0 && secondary_capacity_l > 0, "capacities must be positive");
    require(std::is_sorted(discrete_thresholds_l.begin(), discrete_thresholds_l.end(), std::less_equal<>{}) &&
                std::adjacent_find(discrete_thresholds_l.begin(), discrete_thresholds_l.end()) ==
                    discrete_thresholds_l.end(),
            "discrete thresholds must be strictly increasing");
    require(discrete_thresholds_l[3] == main_capacity_l, "last discrete threshold must equal main capacity");
    require(0 < secondary_refill_on_l && secondary_refill_on_l < secondary_refill_off_l &&
                secondary_refill_off_l < secondary_capacity_l,
            "need 0 < refill_on < refill_off < secondary capacity");
    require(poll_dt_s > 0, "poll_dt_s must be positive");
    // Log timestamps carry tenths of a second.
    require(std::abs(poll_dt_s * 10 - std::round(poll_dt_s * 10)) < 1e-9, "poll_dt_s must be a multiple of 0.1 s");
    require(pump1_rate_lps >= 0 && pump2_rate_lps >= 0 && consumption_rate_lps >= 0, "flow rates must be >= 0");
    require(initial_main_l >= 0 && initial_main_l <= main_capacity_l, "initial main volume out of range");
    require(initial_secondary_l >= 0 && initial_secondary_l <= secondary_capacity_l,
            "initial secondary volume out of range");
    require(initial_recovery_l >= 0 && initial_jitter_l >= 0 && lead_in_s >= 0, "negative initial values");
}

std::uint16_t volume_to_step(double volume_l, const plant_params& params) {
    const double step = std::round(ultrasound_full_scale * volume_l / params.secondary_capacity_l);
    return static_cast<std::uint16_t>(std::clamp(step, 0.0, double{ultrasound_full_scale}));
}

double step_to_volume(std::uint16_t step, const plant_params& params) {
    return params.secondary_capacity_l * step / ultrasound_full_scale;
}

actuator_command command_of(const plant_state& state) {
    return {state.pump1_on,         state.pump2_on,        state.pump1_valve_open,
            state.pump2_valve_open, state.drain_main_open, state.drain_secondary_open};
}

plant_state initial_state(const plant_params& params, std::uint64_t seed) {
    std::seed_seq seq{seed, std::uint64_t{0x1417}};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> jitter(-params.initial_jitter_l, params.initial_jitter_l);
    plant_state s;
    s.main_volume_l = std::clamp(params.initial_main_l + jitter(rng), 0.0, params.main_capacity_l);
    s.secondary_volume_l = std::clamp(params.initial_secondary_l + jitter(rng), 0.0, params.secondary_capacity_l);
    s.recovery_volume_l = params.initial_recovery_l;
    return s;
}

plant_state step(const plant_state& state, const plant_params& params, const actuator_command& cmd, double dt) {
    if (!(dt > 0) || !std::isfinite(dt)) throw validation_error("step: dt must be positive and finite");
    for (double v : {state.t_s, state.main_volume_l, state.secondary_volume_l, state.recovery_volume_l}) {
        if (!std::isfinite(v)) throw simulation_fault("step: non-finite plant state");
    }

    plant_state next = state;
    next.pump1_on = cmd.pump1_on;
    next.pump2_on = cmd.pump2_on;
    next.pump1_valve_open = cmd.pump1_valve_open;
    next.pump2_valve_open = cmd.pump2_valve_open;
    next.drain_main_open = cmd.drain_main_open;
    next.drain_secondary_open = cmd.drain_secondary_open;

    // Requested transfers over dt; a pump moves liquid only with its line valve open.
    const double pump1 = (cmd.pump1_on && cmd.pump1_valve_open) ? params.pump1_rate_lps * dt : 0.0;
    const double pump2 = (cmd.pump2_on && cmd.pump2_valve_open) ? params.pump2_rate_lps * dt : 0.0;
    const double drain_main = cmd.drain_main_open ? params.consumption_rate_lps * dt : 0.0;
    const double drain_secondary = cmd.drain_secondary_open ? params.consumption_rate_lps * dt : 0.0;

    // Outflows are limited by what each source holds, shared proportionally.
    auto scale_out = [](double available, double requested) {
        return requested > available && requested > 0 ? available / requested : 1.0;
    };
    const double main_scale = scale_out(state.main_volume_l, pump1 + drain_main);
    const double p1 = pump1 * main_scale;
    const double dm = drain_main * main_scale;
    const double ds = drain_secondary * scale_out(state.secondary_volume_l, drain_secondary);
    const double p2 = pump2 * scale_out(state.recovery_volume_l, pump2);

    next.main_volume_l = std::max(0.0, state.main_volume_l - p1 - dm) + p2;
    next.secondary_volume_l = std::max(0.0, state.secondary_volume_l - ds) + p1;
    next.recovery_volume_l = std::max(0.0, state.recovery_volume_l - p2) + dm + ds;

    if (next.main_volume_l > params.main_capacity_l) {
        next.spilled_l += next.main_volume_l - params.main_capacity_l;
        next.main_volume_l = params.main_capacity_l;
    }
    if (next.secondary_volume_l > params.secondary_capacity_l) {
        next.spilled_l += next.secondary_volume_l - params.secondary_capacity_l;
        next.secondary_volume_l = params.secondary_capacity_l;
    }
    next.t_s = state.t_s + dt;

    for (double v : {next.t_s, next.main_volume_l, next.secondary_volume_l, next.recovery_volume_l}) {
        if (!std::isfinite(v)) throw simulation_fault("step: integration produced a non-finite state");
    }
    return next;
}

sensor_reading read_true_sensors(const plant_state& state, const plant_params& params) {
    sensor_reading r;
    for (std::size_t i = 0; i < 4; ++i) {
        r.discrete[i] = state.main_volume_l >= params.discrete_thresholds_l[i];
    }
    r.ultrasound_step = volume_to_step(state.secondary_volume_l, params);
    r.timestamp_s = state.t_s;
    return r;
}

actuator_command plc_control(const sensor_reading& reading, const actuator_command& prev,
                             const plant_params& params) {
    actuator_command cmd = prev;

    // Pump 2 refills the main tank from S0 (low) up to S3 (full).
    if (reading.discrete[3]) {
        cmd.pump2_on = false;
    } else if (!reading.discrete[0]) {
        cmd.pump2_on = true;
    }

    // Pump 1 refills the secondary tank between the two ultrasound marks.
    const std::uint16_t on_step = volume_to_step(params.secondary_refill_on_l, params);
    const std::uint16_t off_step = volume_to_step(params.secondary_refill_off_l, params);
    if (reading.ultrasound_step >= off_step) {
        cmd.pump1_on = false;
    } else if (reading.ultrasound_step < on_step) {
        cmd.pump1_on = true;
    }

    cmd.pump1_valve_open = cmd.pump1_on;
    cmd.pump2_valve_open = cmd.pump2_on;
    return cmd;
}

}  // namespace scada::plant
