#include "scada/dataset/labels.hpp"

namespace scada::dataset {

std::string_view to_string(task t) {
    switch (t) {
    case task::binary: return "binary";
    case task::component: return "component";
    case task::scenario: return "scenario";
    }
    return "unknown";
}

std::optional<task> parse_task(std::string_view text) {
    if (text == "binary") return task::binary;
    if (text == "component") return task::component;
    if (text == "scenario") return task::scenario;
    return std::nullopt;
}

std::string relabel(plant::scenario_kind scenario, task view) {
    switch (view) {
    case task::binary: return std::string(plant::is_anomaly(scenario) ? anomaly_label : normal_label);
    case task::component: return std::string(plant::to_string(plant::info(scenario).component));
    case task::scenario: return std::string(plant::to_string(scenario));
    }
    return {};
}

std::vector<std::string> all_labels(task view) {
    std::vector<std::string> out;
    switch (view) {
    case task::binary: out = {std::string(normal_label), std::string(anomaly_label)}; break;
    case task::component:
        for (std::size_t i = 0; i < plant::component_count; ++i) {
            out.emplace_back(plant::to_string(static_cast<plant::affected_component>(i)));
        }
        break;
    case task::scenario:
        for (const auto& row : plant::scenario_catalog()) out.emplace_back(row.id);
        break;
    }
    return out;
}

}  // namespace scada::dataset
