#pragma once

#include "scada/plant/plant.hpp"

#include <array>
#include <cstdint>

namespace scada::modbus {

inline constexpr std::size_t register_count = 10;

// Register 2: discrete level sensors.
inline constexpr std::uint16_t reg2_ds3 = 1u << 4;
inline constexpr std::uint16_t reg2_ds2 = 1u << 5;
inline constexpr std::uint16_t reg2_ds1 = 1u << 6;
inline constexpr std::uint16_t reg2_ds0 = 1u << 7;
inline constexpr std::uint16_t reg2_mask = 0x00F0;

// Register 3: pumps and their valves.
inline constexpr std::uint16_t reg3_pump2 = 1u << 0;
inline constexpr std::uint16_t reg3_pump1 = 1u << 1;
inline constexpr std::uint16_t reg3_pump1_valve = 1u << 4;
inline constexpr std::uint16_t reg3_pump2_valve = 1u << 5;
inline constexpr std::uint16_t reg3_mask = 0x0033;

/// Holding registers 0..9 of the PLC at one poll.
struct register_file {
    std::array<std::uint16_t, register_count> regs{};
    double snapshot_time_s = 0.0;

    bool operator==(const register_file&) const = default;
};

/// Everything recoverable from registers 2..4.
struct decoded_sample {
    std::array<bool, 4> discrete{};  ///< S0..S3
    bool pump1_on = false;
    bool pump2_on = false;
    bool pump1_valve_open = false;
    bool pump2_valve_open = false;
    std::uint16_t ultrasound_step = 0;
    double secondary_volume_l = 0.0;  ///< ultrasound mapped back to litres

    bool operator==(const decoded_sample&) const = default;
};

register_file encode_registers(const plant::sensor_reading& reading, const plant::actuator_command& cmd);

/// Inverse of encode_registers. Throws validation_error naming the register when
/// register 4 exceeds full scale or registers 2/3 carry undocumented bits.
decoded_sample decode_registers(const register_file& rf, const plant::plant_params& params = {});

}  // namespace scada::modbus
