#include "scada/plant/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <string>

namespace scada::plant {

namespace {

using sk = scenario_kind;
using ac = affected_component;
using os = operational_scenario;

constexpr std::array<scenario_info, scenario_count> catalog{{
    {sk::normal, "normal", "Normal", ac::none, os::normal, 5519},
    {sk::plastic_bag, "plastic_bag", "Plastic bag", ac::ultrasound_sensor, os::accident_sabotage, 10549},
    {sk::blocked_measure_1, "blocked_measure_1", "Blocked measure 1", ac::ultrasound_sensor,
     os::breakdown_sabotage, 226},
    {sk::blocked_measure_2, "blocked_measure_2", "Blocked measure 2", ac::ultrasound_sensor,
     os::breakdown_sabotage, 144},
    {sk::floating_2_objects, "floating_2_objects", "Floating objects (2 objects)", ac::ultrasound_sensor,
     os::accident_sabotage, 854},
    {sk::floating_7_objects, "floating_7_objects", "Floating objects (7 objects)", ac::ultrasound_sensor,
     os::accident_sabotage, 733},
    {sk::humidity, "humidity", "Humidity", ac::ultrasound_sensor, os::breakdown, 157},
    {sk::discrete_sensor_1_failure, "discrete_sensor_1_failure", "Discrete sensor 1 failure",
     ac::discrete_sensor_1, os::breakdown, 1920},
    {sk::discrete_sensor_2_failure, "discrete_sensor_2_failure", "Discrete sensor 2 failure",
     ac::discrete_sensor_2, os::breakdown, 5701},
    {sk::dos, "dos", "Denial of service attack", ac::network, os::cyber_attack, 307},
    {sk::spoofing, "spoofing", "Spoofing", ac::network, os::cyber_attack, 10130},
    {sk::wrong_connection, "wrong_connection", "Wrong connection", ac::network, os::breakdown_sabotage, 6228},
    {sk::hit_low, "hit_low", "Person hitting the tanks (low intensity)", ac::whole_subsystem, os::sabotage,
     347},
    {sk::hit_medium, "hit_medium", "Person hitting the tanks (medium intensity)", ac::whole_subsystem,
     os::sabotage, 281},
    {sk::hit_high, "hit_high", "Person hitting the tanks (high intensity)", ac::whole_subsystem, os::sabotage,
     292},
}};

constexpr std::array<std::string_view, component_count> component_ids{
    "none", "ultrasound_sensor", "discrete_sensor_1", "discrete_sensor_2", "network", "whole_subsystem"};

constexpr std::array<std::string_view, 6> operational_ids{
    "normal", "accident_sabotage", "breakdown_sabotage", "breakdown", "cyber_attack", "sabotage"};

std::string fold(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

}  // namespace

const std::array<scenario_info, scenario_count>& scenario_catalog() { return catalog; }

const scenario_info& info(scenario_kind kind) { return catalog[static_cast<std::size_t>(kind)]; }

std::string_view to_string(scenario_kind kind) { return info(kind).id; }

std::string_view to_string(affected_component component) {
    return component_ids[static_cast<std::size_t>(component)];
}

std::string_view to_string(operational_scenario op) { return operational_ids[static_cast<std::size_t>(op)]; }

std::optional<scenario_kind> parse_scenario(std::string_view text) {
    int number = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), number);
    if (ec == std::errc{} && end == text.data() + text.size()) {
        if (number >= 1 && number <= static_cast<int>(scenario_count)) {
            return static_cast<scenario_kind>(number - 1);
        }
        return std::nullopt;
    }
    const std::string key = fold(text);
    for (const auto& row : catalog) {
        if (fold(row.id) == key || fold(row.name) == key) return row.kind;
    }
    return std::nullopt;
}

std::optional<affected_component> parse_component(std::string_view text) {
    const std::string key = fold(text);
    for (std::size_t i = 0; i < component_ids.size(); ++i) {
        if (fold(component_ids[i]) == key) return static_cast<affected_component>(i);
    }
    return std::nullopt;
}

}  // namespace scada::plant
