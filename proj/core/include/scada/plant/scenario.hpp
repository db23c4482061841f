#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace scada::plant {

/// The recorded plant conditions: one normal operation plus fourteen anomalies.
/// Enumerator order is the catalog order and the fixed class order used everywhere.
enum class scenario_kind : std::uint8_t {
    normal,
    plastic_bag,
    blocked_measure_1,
    blocked_measure_2,
    floating_2_objects,
    floating_7_objects,
    humidity,
    discrete_sensor_1_failure,
    discrete_sensor_2_failure,
    dos,
    spoofing,
    wrong_connection,
    hit_low,
    hit_medium,
    hit_high,
};

inline constexpr std::size_t scenario_count = 15;

enum class affected_component : std::uint8_t {
    none,
    ultrasound_sensor,
    discrete_sensor_1,
    discrete_sensor_2,
    network,
    whole_subsystem,
};

inline constexpr std::size_t component_count = 6;

enum class operational_scenario : std::uint8_t {
    normal,
    accident_sabotage,
    breakdown_sabotage,
    breakdown,
    cyber_attack,
    sabotage,
};

struct scenario_info {
    scenario_kind kind;
    std::string_view id;    ///< stable slug used in files, JSON and the CLI
    std::string_view name;  ///< human-readable label
    affected_component component;
    operational_scenario operational;
    std::size_t default_instances;
};

/// One row per scenario, in catalog order.
const std::array<scenario_info, scenario_count>& scenario_catalog();

const scenario_info& info(scenario_kind kind);

std::string_view to_string(scenario_kind kind);
std::string_view to_string(affected_component component);
std::string_view to_string(operational_scenario op);

/// Accepts the slug ("plastic_bag"), the display name, or the 1-based catalog number.
std::optional<scenario_kind> parse_scenario(std::string_view text);
std::optional<affected_component> parse_component(std::string_view text);

inline bool is_anomaly(scenario_kind kind) { return kind != scenario_kind::normal; }

}  // namespace scada::plant
