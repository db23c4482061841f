#pragma once

#include "scada/modbus/log.hpp"
#include "scada/modbus/registers.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace scada::modbus {

/// Single-writer handoff of the latest immutable register snapshot.
class snapshot_channel {
public:
    void publish(register_file rf);
    std::shared_ptr<const register_file> latest() const;

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const register_file> latest_;
};

/// Something the poller can read holding registers from. nullopt means the
/// request timed out.
class register_source {
public:
    virtual ~register_source() = default;
    virtual std::optional<std::vector<std::uint16_t>> read(std::uint16_t start, std::uint16_t quantity) = 0;
};

/// In-process source backed by a snapshot channel. While `flooded` is set every
/// request times out, which is how a denial of service shows up to the poller.
class channel_source final : public register_source {
public:
    explicit channel_source(const snapshot_channel& channel) : channel_(channel) {}

    std::optional<std::vector<std::uint16_t>> read(std::uint16_t start, std::uint16_t quantity) override;
    void set_flooded(bool flooded) { flooded_ = flooded; }

private:
    const snapshot_channel& channel_;
    std::atomic<bool> flooded_{false};
};

struct poller_config {
    /// On timeout write nothing instead of re-emitting the last known values.
    bool gap_mode = false;
};

/// The 0.1 s logger: one read of registers 0..9 per tick, 10 rows per instance.
class poller {
public:
    explicit poller(register_source& source, poller_config cfg = {}) : source_(source), cfg_(cfg) {}

    /// Poll once and stamp the result with `now`. On timeout the last known values
    /// are repeated with the current timestamp (zeros plus a warning if nothing was
    /// ever received). Returns nullopt only for a timeout in gap mode.
    std::optional<std::vector<log_row>> poll_tick(log_time now);

    std::size_t timeouts() const { return timeouts_; }
    const std::optional<register_file>& last_known() const { return last_; }
    /// Registers logged by the most recent tick.
    const register_file& last_logged() const { return logged_; }

private:
    register_source& source_;
    poller_config cfg_;
    std::optional<register_file> last_;
    register_file logged_;
    std::size_t timeouts_ = 0;
};

}  // namespace scada::modbus
