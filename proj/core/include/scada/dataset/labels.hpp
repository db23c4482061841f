#pragma once

#include "scada/plant/scenario.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scada::dataset {

/// Which label view a model is trained on.
enum class task : std::uint8_t { binary, component, scenario };

std::string_view to_string(task t);
std::optional<task> parse_task(std::string_view text);

inline constexpr std::string_view normal_label = "normal";
inline constexpr std::string_view anomaly_label = "anomaly";

/// Label of a scenario under a view: "normal"/"anomaly", the component id, or the scenario id.
std::string relabel(plant::scenario_kind scenario, task view);

/// Every label of a view in its fixed order (catalog order; normal first).
std::vector<std::string> all_labels(task view);

}  // namespace scada::dataset
