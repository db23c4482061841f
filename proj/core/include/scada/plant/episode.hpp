#pragma once

#include "scada/modbus/log.hpp"
#include "scada/plant/injector.hpp"
#include "scada/plant/loop.hpp"
#include "scada/plant/plant.hpp"
#include "scada/plant/scenario.hpp"

#include <filesystem>
#include <functional>
#include <vector>

namespace scada::plant {

struct episode_options {
    plant_params params;
    scenario_model_config models;
    modbus::log_time epoch = modbus::default_log_epoch();
    bool gap_mode = false;
};

/// Logged output of one scenario run.
struct episode_log {
    scenario_kind scenario = scenario_kind::normal;
    std::uint64_t seed = 0;
    std::vector<modbus::log_row> rows;
};

/// Called after every control cycle, lead-in included.
using cycle_observer = std::function<void(const cycle_result&, const plant_state& before)>;

/// Run the closed loop for a lead-in under Normal, start `scenario`, then log
/// `n_instances` polls. Identical arguments give identical rows.
episode_log run_episode(scenario_kind scenario, std::size_t n_instances, std::uint64_t seed,
                        const episode_options& options = {}, const cycle_observer& observer = {});

/// Canonical file name for a scenario log: "NN_<id>.csv" with the 1-based catalog number.
std::string episode_file_name(scenario_kind scenario);

}  // namespace scada::plant
