#pragma once

#include "scada/modbus/frame.hpp"
#include "scada/modbus/poller.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

namespace boost::asio {
class io_context;
}

namespace scada::modbus {

inline constexpr std::uint16_t default_modbus_port = 1502;

/// Modbus/TCP slave serving function 0x03 over registers 0..9 from the latest
/// snapshot. Other function codes get exception 0x01. Connections are handled
/// concurrently on the caller's io_context.
class tcp_server {
public:
    /// Binds immediately; port 0 picks an ephemeral port. Throws on bind failure.
    tcp_server(boost::asio::io_context& io, const snapshot_channel& channel, std::uint16_t port,
               std::string bind_address = "127.0.0.1");
    ~tcp_server();
    tcp_server(const tcp_server&) = delete;
    tcp_server& operator=(const tcp_server&) = delete;

    void start();
    void stop();
    std::uint16_t port() const;

    /// While set, requests are read and silently dropped (the poller sees timeouts).
    void set_flooded(bool flooded);
    std::uint64_t requests_served() const;

private:
    struct impl;
    std::shared_ptr<impl> impl_;
};

/// Blocking Modbus/TCP master with a per-request timeout. Reconnects lazily after
/// a timeout or a broken connection.
class tcp_client final : public register_source {
public:
    tcp_client(std::string host, std::uint16_t port, std::chrono::milliseconds timeout, std::uint8_t unit_id = 1);
    ~tcp_client() override;

    std::optional<std::vector<std::uint16_t>> read(std::uint16_t start, std::uint16_t quantity) override;

    /// Send an arbitrary pre-built frame and return the raw reply (for protocol tests).
    std::optional<bytes> exchange(const bytes& frame);

private:
    struct impl;
    std::unique_ptr<impl> impl_;
};

}  // namespace scada::modbus
