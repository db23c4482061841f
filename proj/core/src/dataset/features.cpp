#include "scada/dataset/features.hpp"

#include "scada/error.hpp"
#include "scada/modbus/registers.hpp"

#include <bitset>

namespace scada::dataset {

std::vector<instance> extract_instances(std::span<const modbus::log_row> rows, std::string_view source_file,
                                        plant::scenario_kind scenario) {
    std::vector<instance> out;
    out.reserve(rows.size() / modbus::register_count);
    std::size_t begin = 0;
    while (begin < rows.size()) {
        std::size_t end = begin;
        while (end < rows.size() && rows[end].time == rows[begin].time) ++end;

        const auto stamp = [&] {
            return modbus::format_date(rows[begin].time) + " " + modbus::format_time(rows[begin].time);
        };
        std::bitset<modbus::register_count> seen;
        std::array<std::uint16_t, modbus::register_count> regs{};
        for (std::size_t i = begin; i < end; ++i) {
            const auto r = rows[i].register_number;
            if (r >= modbus::register_count) {
                throw structural_error("timestamp " + stamp() + ": register " + std::to_string(r) + " out of range");
            }
            if (seen.test(r)) {
                throw structural_error("timestamp " + stamp() + ": register " + std::to_string(r) + " repeated");
            }
            seen.set(r);
            regs[r] = rows[i].value;
        }
        if (!seen.all()) {
            for (std::size_t r = 0; r < modbus::register_count; ++r) {
                if (!seen.test(r)) {
                    throw structural_error("timestamp " + stamp() + ": register " + std::to_string(r) + " missing");
                }
            }
        }
        out.push_back({rows[begin].time, regs[2], regs[3], regs[4], std::string(source_file), scenario});
        begin = end;
    }
    return out;
}

double rate_of_change(std::span<const instance> instances, std::size_t i) {
    if (i < rate_window || i >= instances.size()) {
        throw validation_error("rate_of_change: index " + std::to_string(i) + " has no instance 10 polls back");
    }
    const auto& now = instances[i];
    const auto& then = instances[i - rate_window];
    const auto dt_tenths = now.time.tenths - then.time.tenths;
    if (dt_tenths <= 0) {
        throw structural_error("rate_of_change: non-increasing time at " + modbus::format_time(now.time));
    }
    return (static_cast<double>(now.reg4) - static_cast<double>(then.reg4)) / (static_cast<double>(dt_tenths) / 10.0);
}

const std::array<std::string_view, feature_count>& feature_names() {
    static constexpr std::array<std::string_view, feature_count> names{
        "s0", "s1", "s2", "s3", "pump1", "pump2", "pump1_valve", "pump2_valve", "depth", "rate"};
    return names;
}

feature_vector make_features(const instance& inst, double rate) {
    auto bit = [](std::uint16_t reg, std::uint16_t mask) { return (reg & mask) ? 1.0 : 0.0; };
    using namespace modbus;
    return {bit(inst.reg2, reg2_ds0),         bit(inst.reg2, reg2_ds1),  bit(inst.reg2, reg2_ds2),
            bit(inst.reg2, reg2_ds3),         bit(inst.reg3, reg3_pump1), bit(inst.reg3, reg3_pump2),
            bit(inst.reg3, reg3_pump1_valve), bit(inst.reg3, reg3_pump2_valve), static_cast<double>(inst.reg4),
            rate};
}

std::vector<featured_instance> featurize(std::span<const instance> instances) {
    std::vector<featured_instance> out;
    if (instances.size() <= rate_window) return out;
    out.reserve(instances.size() - rate_window);
    for (std::size_t i = rate_window; i < instances.size(); ++i) {
        out.push_back({instances[i], i, make_features(instances[i], rate_of_change(instances, i))});
    }
    return out;
}

}  // namespace scada::dataset
