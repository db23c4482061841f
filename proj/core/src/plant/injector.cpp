#include "scada/plant/injector.hpp"

#include "scada/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace scada::plant {

void scenario_model_config::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw validation_error(std::string("scenario models: ") + what);
    };
    require(plastic_bag_noise_scale >= 0 && blocked_jitter_sigma >= 0 && humidity_noise_sigma >= 0 &&
                spoof_noise_sigma >= 0 && floating_ripple_sigma_per_object >= 0,
            "noise scales must be >= 0");
    require(floating_spike_prob_per_object >= 0 && floating_spike_prob_per_object * 7 <= 1,
            "spike probability must keep 7 objects <= 1");
    require(floating_spike_min_step <= floating_spike_max_step, "spike range inverted");
    require(hit_amplitude_low < hit_amplitude_medium && hit_amplitude_medium < hit_amplitude_high,
            "hit amplitudes must be increasing");
    require(hit_period_s > 0 && spoof_period_s > 0, "periods must be positive");
    for (double p : {hit_flicker_prob_low, hit_flicker_prob_medium, hit_flicker_prob_high}) {
        require(p >= 0 && p <= 1, "flicker probabilities must be in [0,1]");
    }
}

double hit_amplitude(scenario_kind kind, const scenario_model_config& cfg) {
    switch (kind) {
    case scenario_kind::hit_low: return cfg.hit_amplitude_low;
    case scenario_kind::hit_medium: return cfg.hit_amplitude_medium;
    case scenario_kind::hit_high: return cfg.hit_amplitude_high;
    default: return 0.0;
    }
}

namespace {

std::uint16_t to_step(double value) {
    return static_cast<std::uint16_t>(std::clamp(std::round(value), 0.0, double{ultrasound_full_scale}));
}

double flicker_prob(scenario_kind kind, const scenario_model_config& cfg) {
    switch (kind) {
    case scenario_kind::hit_low: return cfg.hit_flicker_prob_low;
    case scenario_kind::hit_medium: return cfg.hit_flicker_prob_medium;
    case scenario_kind::hit_high: return cfg.hit_flicker_prob_high;
    default: return 0.0;
    }
}

}  // namespace

sensor_reading inject_scenario(const sensor_reading& reading, const injection_context& ctx, double elapsed_s,
                               const scenario_model_config& cfg) {
    if (ctx.scenario == scenario_kind::normal || ctx.scenario == scenario_kind::dos) return reading;

    // One generator per (seed, scenario, millisecond of elapsed time).
    const auto tick = static_cast<std::uint64_t>(std::llround(std::max(0.0, elapsed_s) * 1000.0));
    std::seed_seq seq{ctx.seed, static_cast<std::uint64_t>(ctx.scenario), tick};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);

    sensor_reading out = reading;
    const double us = reading.ultrasound_step;

    switch (ctx.scenario) {
    case scenario_kind::plastic_bag: {
        std::student_t_distribution<double> tail(2.0);
        out.ultrasound_step = to_step(cfg.plastic_bag_level_step + cfg.plastic_bag_noise_scale * tail(rng));
        break;
    }
    case scenario_kind::blocked_measure_1:
        out.ultrasound_step = to_step(ctx.captured.ultrasound_step + cfg.blocked_jitter_sigma * gauss(rng));
        break;
    case scenario_kind::blocked_measure_2:
        out.ultrasound_step = to_step(ctx.captured.ultrasound_step + cfg.blocked2_offset_step +
                                      cfg.blocked_jitter_sigma * gauss(rng));
        break;
    case scenario_kind::floating_2_objects:
    case scenario_kind::floating_7_objects: {
        const double objects = ctx.scenario == scenario_kind::floating_2_objects ? 2 : 7;
        double value = us + cfg.floating_offset_step_per_object * objects +
                       cfg.floating_ripple_sigma_per_object * objects * gauss(rng);
        std::bernoulli_distribution spike(cfg.floating_spike_prob_per_object * objects);
        if (spike(rng)) {
            std::uniform_real_distribution<double> size(cfg.floating_spike_min_step, cfg.floating_spike_max_step);
            value += size(rng);
        }
        out.ultrasound_step = to_step(value);
        break;
    }
    case scenario_kind::humidity:
        out.ultrasound_step =
            to_step(us * (1.0 + cfg.humidity_drift_per_s * elapsed_s) + cfg.humidity_noise_sigma * gauss(rng));
        break;
    case scenario_kind::discrete_sensor_1_failure: out.discrete[1] = false; break;
    case scenario_kind::discrete_sensor_2_failure: out.discrete[2] = false; break;
    case scenario_kind::spoofing: {
        const double phase = 2.0 * std::numbers::pi * elapsed_s / cfg.spoof_period_s;
        out.ultrasound_step = to_step(cfg.spoof_level_step + cfg.spoof_swing_step * std::sin(phase) +
                                      cfg.spoof_noise_sigma * gauss(rng));
        break;
    }
    case scenario_kind::wrong_connection: {
        const auto active = std::count(reading.discrete.begin(), reading.discrete.end(), true);
        out.ultrasound_step = to_step(cfg.wrong_connection_step_per_sensor * static_cast<double>(active));
        break;
    }
    case scenario_kind::hit_low:
    case scenario_kind::hit_medium:
    case scenario_kind::hit_high: {
        const double omega = 2.0 * std::numbers::pi / cfg.hit_period_s;
        out.ultrasound_step = to_step(us + hit_amplitude(ctx.scenario, cfg) * std::sin(omega * elapsed_s));
        std::bernoulli_distribution flip(flicker_prob(ctx.scenario, cfg));
        for (auto& bit : out.discrete) {
            if (flip(rng)) bit = !bit;
        }
        break;
    }
    case scenario_kind::normal:
    case scenario_kind::dos: break;
    }
    return out;
}

scenario_injector::scenario_injector(std::uint64_t seed, scenario_model_config cfg) : cfg_(cfg) {
    cfg_.validate();
    ctx_.seed = seed;
}

void scenario_injector::start(scenario_kind kind, const sensor_reading& current, double now_s) {
    ctx_.scenario = kind;
    ctx_.captured = current;
    started_s_ = now_s;
}

sensor_reading scenario_injector::apply(const sensor_reading& truth) const {
    return inject_scenario(truth, ctx_, truth.timestamp_s - started_s_, cfg_);
}

}  // namespace scada::plant
