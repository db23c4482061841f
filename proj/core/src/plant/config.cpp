#include "scada/plant/config.hpp"

#include "scada/error.hpp"

#include <fstream>

namespace scada::plant {

namespace {

// Field table shared by the reader and the writer.
template <typename F>
void plant_fields(plant_params& p, F&& f) {
    f("main_capacity_l", p.main_capacity_l);
    f("secondary_capacity_l", p.secondary_capacity_l);
    f("pump1_rate_lps", p.pump1_rate_lps);
    f("pump2_rate_lps", p.pump2_rate_lps);
    f("consumption_rate_lps", p.consumption_rate_lps);
    f("poll_dt_s", p.poll_dt_s);
    f("secondary_refill_on_l", p.secondary_refill_on_l);
    f("secondary_refill_off_l", p.secondary_refill_off_l);
    f("initial_main_l", p.initial_main_l);
    f("initial_secondary_l", p.initial_secondary_l);
    f("initial_recovery_l", p.initial_recovery_l);
    f("initial_jitter_l", p.initial_jitter_l);
    f("lead_in_s", p.lead_in_s);
}

template <typename F>
void model_fields(scenario_model_config& m, F&& f) {
    f("plastic_bag_level_step", m.plastic_bag_level_step);
    f("plastic_bag_noise_scale", m.plastic_bag_noise_scale);
    f("blocked_jitter_sigma", m.blocked_jitter_sigma);
    f("blocked2_offset_step", m.blocked2_offset_step);
    f("floating_offset_step_per_object", m.floating_offset_step_per_object);
    f("floating_ripple_sigma_per_object", m.floating_ripple_sigma_per_object);
    f("floating_spike_prob_per_object", m.floating_spike_prob_per_object);
    f("floating_spike_min_step", m.floating_spike_min_step);
    f("floating_spike_max_step", m.floating_spike_max_step);
    f("humidity_drift_per_s", m.humidity_drift_per_s);
    f("humidity_noise_sigma", m.humidity_noise_sigma);
    f("wrong_connection_step_per_sensor", m.wrong_connection_step_per_sensor);
    f("spoof_level_step", m.spoof_level_step);
    f("spoof_swing_step", m.spoof_swing_step);
    f("spoof_period_s", m.spoof_period_s);
    f("spoof_noise_sigma", m.spoof_noise_sigma);
    f("hit_amplitude_low", m.hit_amplitude_low);
    f("hit_amplitude_medium", m.hit_amplitude_medium);
    f("hit_amplitude_high", m.hit_amplitude_high);
    f("hit_period_s", m.hit_period_s);
    f("hit_flicker_prob_low", m.hit_flicker_prob_low);
    f("hit_flicker_prob_medium", m.hit_flicker_prob_medium);
    f("hit_flicker_prob_high", m.hit_flicker_prob_high);
}

}  // namespace

simulation_config::simulation_config() {
    for (const auto& row : scenario_catalog()) instances[static_cast<std::size_t>(row.kind)] = row.default_instances;
}

simulation_config simulation_config::from_json(const nlohmann::json& j) {
    simulation_config cfg;
    try {
        if (j.contains("plant")) {
            const auto& p = j.at("plant");
            plant_fields(cfg.plant, [&](const char* key, double& field) {
                if (p.contains(key)) field = p.at(key).get<double>();
            });
            if (p.contains("discrete_thresholds_l")) {
                cfg.plant.discrete_thresholds_l = p.at("discrete_thresholds_l").get<std::array<double, 4>>();
            }
        }
        if (j.contains("scenario_models")) {
            const auto& m = j.at("scenario_models");
            model_fields(cfg.models, [&](const char* key, double& field) {
                if (m.contains(key)) field = m.at(key).get<double>();
            });
        }
        if (j.contains("instances")) {
            for (const auto& [key, value] : j.at("instances").items()) {
                const auto kind = parse_scenario(key);
                if (!kind) throw config_error("unknown scenario '" + key + "' in instances");
                const auto n = value.get<std::int64_t>();
                if (n <= 0) throw config_error("instances for '" + key + "' must be > 0");
                cfg.instances[static_cast<std::size_t>(*kind)] = static_cast<std::size_t>(n);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("simulation config: ") + e.what());
    }
    try {
        cfg.plant.validate();
        cfg.models.validate();
    } catch (const validation_error& e) {
        throw config_error(e.what());
    }
    return cfg;
}

simulation_config simulation_config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(path.string() + ": " + e.what());
    }
}

nlohmann::json simulation_config::to_json() const {
    nlohmann::json j;
    auto plant = this->plant;
    auto models = this->models;
    plant_fields(plant, [&](const char* key, double& field) { j["plant"][key] = field; });
    j["plant"]["discrete_thresholds_l"] = plant.discrete_thresholds_l;
    model_fields(models, [&](const char* key, double& field) { j["scenario_models"][key] = field; });
    for (const auto& row : scenario_catalog()) {
        j["instances"][std::string(row.id)] = instances[static_cast<std::size_t>(row.kind)];
    }
    return j;
}

}  // namespace scada::plant
