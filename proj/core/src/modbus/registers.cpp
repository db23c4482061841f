#include "scada/modbus/registers.hpp"

#include "scada/error.hpp"

#include <string>

namespace scada::modbus {

register_file encode_registers(const plant::sensor_reading& reading, const plant::actuator_command& cmd) {
    register_file rf;
    std::uint16_t r2 = 0;
    if (reading.discrete[0]) r2 |= reg2_ds0;
    if (reading.discrete[1]) r2 |= reg2_ds1;
    if (reading.discrete[2]) r2 |= reg2_ds2;
    if (reading.discrete[3]) r2 |= reg2_ds3;

    std::uint16_t r3 = 0;
    if (cmd.pump2_on) r3 |= reg3_pump2;
    if (cmd.pump1_on) r3 |= reg3_pump1;
    if (cmd.pump1_valve_open) r3 |= reg3_pump1_valve;
    if (cmd.pump2_valve_open) r3 |= reg3_pump2_valve;

    rf.regs[2] = r2;
    rf.regs[3] = r3;
    rf.regs[4] = reading.ultrasound_step;
    rf.snapshot_time_s = reading.timestamp_s;
    return rf;
}

decoded_sample decode_registers(const register_file& rf, const plant::plant_params& params) {
    const std::uint16_t r2 = rf.regs[2];
    const std::uint16_t r3 = rf.regs[3];
    const std::uint16_t r4 = rf.regs[4];
    if (r2 & ~reg2_mask) {
        throw validation_error("register 2: undocumented bits set (value " + std::to_string(r2) + ")");
    }
    if (r3 & ~reg3_mask) {
        throw validation_error("register 3: undocumented bits set (value " + std::to_string(r3) + ")");
    }
    if (r4 > plant::ultrasound_full_scale) {
        throw validation_error("register 4: depth step " + std::to_string(r4) + " exceeds 10000");
    }

    decoded_sample d;
    d.discrete = {(r2 & reg2_ds0) != 0, (r2 & reg2_ds1) != 0, (r2 & reg2_ds2) != 0, (r2 & reg2_ds3) != 0};
    d.pump2_on = (r3 & reg3_pump2) != 0;
    d.pump1_on = (r3 & reg3_pump1) != 0;
    d.pump1_valve_open = (r3 & reg3_pump1_valve) != 0;
    d.pump2_valve_open = (r3 & reg3_pump2_valve) != 0;
    d.ultrasound_step = r4;
    d.secondary_volume_l = plant::step_to_volume(r4, params);
    return d;
}

}  // namespace scada::modbus
