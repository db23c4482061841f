#pragma once

#include <array>
#include <cstdint>

namespace scada::plant {

/// Physical constants and control thresholds of the two-tank rig.
struct plant_params {
    double main_capacity_l = 9.0;
    double secondary_capacity_l = 7.0;
    /// Level marks of discrete sensors S0..S3 in the main tank.
    std::array<double, 4> discrete_thresholds_l{1.25, 3.35, 8.0, 9.0};
    double pump1_rate_lps = 0.05;        ///< main -> secondary
    double pump2_rate_lps = 0.05;        ///< recovery -> main
    double consumption_rate_lps = 0.02;  ///< per open drain valve, into recovery
    double poll_dt_s = 0.1;
    double secondary_refill_on_l = 2.1;
    double secondary_refill_off_l = 6.3;

    double initial_main_l = 8.5;
    double initial_secondary_l = 4.0;
    double initial_recovery_l = 30.0;
    /// Seeded uniform perturbation of the initial tank levels (+/- this much).
    double initial_jitter_l = 0.2;
    /// Normal-operation time simulated and polled before a scenario starts and logging begins.
    double lead_in_s = 1.0;

    /// Throws validation_error when an invariant does not hold.
    void validate() const;
};

inline constexpr std::uint16_t ultrasound_full_scale = 10000;

/// Secondary-tank volume to ultrasound step: round(10000 * V / capacity).
std::uint16_t volume_to_step(double volume_l, const plant_params& params);
double step_to_volume(std::uint16_t step, const plant_params& params);

struct plant_state {
    double t_s = 0.0;
    double main_volume_l = 0.0;
    double secondary_volume_l = 0.0;
    double recovery_volume_l = 0.0;
    /// Liquid lost to overflow so far; main + secondary + recovery + spilled is constant.
    double spilled_l = 0.0;
    bool pump1_on = false;
    bool pump2_on = false;
    bool pump1_valve_open = false;
    bool pump2_valve_open = false;
    bool drain_main_open = true;
    bool drain_secondary_open = true;

    double total_liquid_l() const { return main_volume_l + secondary_volume_l + recovery_volume_l + spilled_l; }

    bool operator==(const plant_state&) const = default;
};

struct actuator_command {
    bool pump1_on = false;
    bool pump2_on = false;
    bool pump1_valve_open = false;
    bool pump2_valve_open = false;
    bool drain_main_open = true;
    bool drain_secondary_open = true;

    bool operator==(const actuator_command&) const = default;
};

/// The actuator settings currently latched in a state.
actuator_command command_of(const plant_state& state);

struct sensor_reading {
    std::array<bool, 4> discrete{};  ///< S0..S3
    std::uint16_t ultrasound_step = 0;
    double timestamp_s = 0.0;

    bool operator==(const sensor_reading&) const = default;
};

/// Initial state for an episode; the jitter depends on the seed only, so every
/// scenario generated with one seed starts from the same tank levels.
plant_state initial_state(const plant_params& params, std::uint64_t seed);

/// Advance the plant by dt with the given actuator command (explicit Euler, piecewise
/// constant flows). Outflow is limited to what the source holds; overflow is spilled.
/// Throws simulation_fault on a non-finite state and validation_error on dt <= 0.
plant_state step(const plant_state& state, const plant_params& params, const actuator_command& cmd, double dt);

/// Discrete bit i is set iff main volume >= threshold i; ultrasound is the linear step map.
sensor_reading read_true_sensors(const plant_state& state, const plant_params& params);

/// PLC hysteresis law. Depends only on what the sensors report. Stop conditions win
/// over start conditions when a corrupted reading asserts both.
actuator_command plc_control(const sensor_reading& reading, const actuator_command& prev,
                             const plant_params& params = {});

}  // namespace scada::plant
