#pragma once

#include "scada/plant/injector.hpp"
#include "scada/plant/plant.hpp"
#include "scada/plant/scenario.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>

namespace scada::plant {

/// Plant parameters, scenario model shapes and per-scenario episode lengths.
/// Loaded from a JSON file whose keys mirror the field names one-to-one
/// ("plant", "scenario_models", "instances"); missing keys keep their defaults.
struct simulation_config {
    plant_params plant;
    scenario_model_config models;
    std::array<std::size_t, scenario_count> instances{};

    simulation_config();

    static simulation_config from_json(const nlohmann::json& j);
    static simulation_config load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

}  // namespace scada::plant
