#pragma once

#include "scada/plant/plant.hpp"
#include "scada/plant/scenario.hpp"

#include <cstdint>

namespace scada::plant {

/// Shape parameters of the per-scenario sensor corruption models. Every model is a
/// pure function of (seed, scenario, elapsed time, captured reading).
struct scenario_model_config {
    double plastic_bag_level_step = 9600;
    double plastic_bag_noise_scale = 150;  ///< scale of a Student-t(2) disturbance

    double blocked_jitter_sigma = 12;        ///< echo jitter around the stuck value
    double blocked2_offset_step = -1800;     ///< measure 2 sticks this far from the captured value

    double floating_offset_step_per_object = 150;  ///< objects on the surface shorten the echo path
    double floating_ripple_sigma_per_object = 15;
    double floating_spike_prob_per_object = 0.03;  ///< per poll
    double floating_spike_min_step = 800;
    double floating_spike_max_step = 1600;

    double humidity_drift_per_s = 0.015;  ///< multiplicative gain growth
    double humidity_noise_sigma = 8;

    double wrong_connection_step_per_sensor = 2500;

    double spoof_level_step = 2600;
    double spoof_swing_step = 150;
    double spoof_period_s = 30;
    double spoof_noise_sigma = 25;

    double hit_amplitude_low = 600;
    double hit_amplitude_medium = 1500;
    double hit_amplitude_high = 3000;
    double hit_period_s = 4.0;
    double hit_flicker_prob_low = 0.02;
    double hit_flicker_prob_medium = 0.05;
    double hit_flicker_prob_high = 0.10;

    void validate() const;
};

/// What an active scenario needs beyond the live reading.
struct injection_context {
    scenario_kind scenario = scenario_kind::normal;
    std::uint64_t seed = 0;
    /// True reading at the moment the scenario started (used by stuck-sensor models).
    sensor_reading captured{};
};

/// Sinusoid amplitude for the tank-hitting scenarios, 0 otherwise.
double hit_amplitude(scenario_kind kind, const scenario_model_config& cfg);

/// Corrupt a true reading according to the active scenario. `elapsed_s` is the time
/// since the scenario started. DoS is the identity here: it acts at the polling layer.
/// Only fields owned by the scenario's affected component are modified.
sensor_reading inject_scenario(const sensor_reading& reading, const injection_context& ctx, double elapsed_s,
                               const scenario_model_config& cfg = {});

/// Stateful wrapper that captures the reading when a scenario starts.
class scenario_injector {
public:
    explicit scenario_injector(std::uint64_t seed = 0, scenario_model_config cfg = {});

    /// Start `kind` at time `now_s`; `current` is the true reading at that moment.
    void start(scenario_kind kind, const sensor_reading& current, double now_s);
    void clear() { ctx_.scenario = scenario_kind::normal; }

    scenario_kind active() const { return ctx_.scenario; }
    double started_at() const { return started_s_; }
    const scenario_model_config& config() const { return cfg_; }

    sensor_reading apply(const sensor_reading& truth) const;

private:
    injection_context ctx_;
    double started_s_ = 0.0;
    scenario_model_config cfg_;
};

}  // namespace scada::plant
