#include "scada/plant/episode.hpp"

#include "scada/error.hpp"
#include "scada/modbus/poller.hpp"

#include <cmath>
#include <cstdio>

namespace scada::plant {

episode_log run_episode(scenario_kind scenario, std::size_t n_instances, std::uint64_t seed,
                        const episode_options& options, const cycle_observer& observer) {
    if (n_instances == 0) throw validation_error("run_episode: n_instances must be > 0");

    closed_loop loop(options.params, seed, options.models);
    modbus::channel_source source(loop.channel());
    modbus::poller logger(source, {options.gap_mode});

    const auto tenths_per_poll = static_cast<std::int64_t>(std::llround(options.params.poll_dt_s * 10));
    const auto lead_in = static_cast<std::size_t>(std::llround(options.params.lead_in_s / options.params.poll_dt_s));

    episode_log log{scenario, seed, {}};
    log.rows.reserve(n_instances * modbus::register_count);

    auto run_cycle = [&](bool record) {
        const plant_state before = loop.state();
        const cycle_result r = loop.tick();
        if (observer) observer(r, before);
        const modbus::log_time now{options.epoch.tenths + static_cast<std::int64_t>(r.tick) * tenths_per_poll};
        auto rows = logger.poll_tick(now);
        if (record && rows) log.rows.insert(log.rows.end(), rows->begin(), rows->end());
    };

    for (std::size_t i = 0; i < lead_in; ++i) run_cycle(false);

    loop.request_scenario(scenario);
    source.set_flooded(scenario == scenario_kind::dos);
    for (std::size_t i = 0; i < n_instances; ++i) run_cycle(true);
    return log;
}

std::string episode_file_name(scenario_kind scenario) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d_", static_cast<int>(scenario) + 1);
    return std::string(buf) + std::string(to_string(scenario)) + ".csv";
}

}  // namespace scada::plant
