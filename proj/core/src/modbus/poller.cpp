#include "scada/modbus/poller.hpp"

#include <spdlog/spdlog.h>

namespace scada::modbus {

void snapshot_channel::publish(register_file rf) {
    auto next = std::make_shared<const register_file>(std::move(rf));
    std::lock_guard lock(mutex_);
    latest_ = std::move(next);
}

std::shared_ptr<const register_file> snapshot_channel::latest() const {
    std::lock_guard lock(mutex_);
    return latest_;
}

std::optional<std::vector<std::uint16_t>> channel_source::read(std::uint16_t start, std::uint16_t quantity) {
    if (flooded_) return std::nullopt;
    const auto snap = channel_.latest();
    if (!snap || start + quantity > register_count) return std::nullopt;
    return std::vector<std::uint16_t>(snap->regs.begin() + start, snap->regs.begin() + start + quantity);
}

std::optional<std::vector<log_row>> poller::poll_tick(log_time now) {
    auto values = source_.read(0, register_count);
    if (values && values->size() == register_count) {
        register_file rf;
        std::copy(values->begin(), values->end(), rf.regs.begin());
        rf.snapshot_time_s = now.seconds();
        last_ = rf;
        logged_ = rf;
        return rows_for(rf, now);
    }

    ++timeouts_;
    if (cfg_.gap_mode) return std::nullopt;
    if (!last_) {
        spdlog::warn("poll at {} timed out with no prior registers; logging zeros", format_time(now));
        logged_ = register_file{};
    } else {
        logged_ = *last_;
    }
    logged_.snapshot_time_s = now.seconds();
    return rows_for(logged_, now);
}

}  // namespace scada::modbus
