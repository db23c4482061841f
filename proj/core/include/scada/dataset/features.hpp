#pragma once

#include "scada/modbus/log.hpp"
#include "scada/plant/scenario.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scada::dataset {

/// Registers 2..4 of one poll.
struct instance {
    modbus::log_time time;
    std::uint16_t reg2 = 0;
    std::uint16_t reg3 = 0;
    std::uint16_t reg4 = 0;
    std::string source_file;
    plant::scenario_kind scenario = plant::scenario_kind::normal;

    bool operator==(const instance&) const = default;
};

/// Group rows by timestamp (groups of exactly registers 0..9) into instances.
/// Throws structural_error naming the timestamp of an incomplete group.
std::vector<instance> extract_instances(std::span<const modbus::log_row> rows, std::string_view source_file = {},
                                        plant::scenario_kind scenario = plant::scenario_kind::normal);

/// Register-4 difference quotient over the previous `rate_window` polls.
inline constexpr std::size_t rate_window = 10;

/// (reg4[i] - reg4[i-10]) / (time[i] - time[i-10]) in steps per second.
/// Throws validation_error for i < 10 and structural_error for a non-positive time delta.
double rate_of_change(std::span<const instance> instances, std::size_t i);

inline constexpr std::size_t feature_count = 10;
using feature_vector = std::array<double, feature_count>;

/// s0..s3, pump1, pump2, pump1_valve, pump2_valve, depth, rate
const std::array<std::string_view, feature_count>& feature_names();

feature_vector make_features(const instance& inst, double rate);

struct featured_instance {
    instance source;
    std::size_t index = 0;  ///< position of the instance in its file
    feature_vector features{};
};

/// Features for every instance of one file from index 10 on; the first 10 have no
/// defined rate and are dropped.
std::vector<featured_instance> featurize(std::span<const instance> instances);

}  // namespace scada::dataset
