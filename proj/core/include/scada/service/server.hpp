#pragma once

#include "scada/service/live.hpp"

#include <cstdint>
#include <memory>
#include <string>

namespace boost::asio {
class io_context;
}

namespace scada::service {

namespace detail {
struct server_state;
}

struct server_options {
    std::string bind_address = "127.0.0.1";
    std::uint16_t http_port = 8080;    ///< 0: ephemeral
    std::uint16_t modbus_port = 1502;  ///< 0: ephemeral
    bool serve_modbus = true;
    double speed = 1.0;
    std::vector<schedule_entry> schedule;
    std::size_t max_ticks = 0;  ///< 0: run until stopped
    std::filesystem::path output_dir;  ///< when set, alerts are appended to alerts.jsonl
};

/// HTTP + WebSocket front end for a live_loop, all on one io_context.
///   GET /health   JSON status
///   GET /metrics  Prometheus text format
///   /ws           envelopes out, operator messages in
/// Rejections go only to the sender; everything else is broadcast.
class server {
public:
    /// Binds both ports at once; throws error when a port is taken.
    server(boost::asio::io_context& io, std::shared_ptr<const ml::model> model, live_options live,
           server_options options);
    ~server();
    server(const server&) = delete;
    server& operator=(const server&) = delete;

    void start();
    /// Close listeners and client connections and stop ticking.
    void stop();

    std::uint16_t http_port() const;
    std::uint16_t modbus_port() const;  ///< 0 when Modbus is not served
    bool finished() const;              ///< max_ticks reached

    nlohmann::json health() const;
    std::string metrics() const;

private:
    std::shared_ptr<detail::server_state> impl_;
};

/// Load the model and run until SIGINT/SIGTERM (or max_ticks). A missing or
/// unreadable model is a config_error before anything binds.
void serve(const run_config& cfg);

/// Load and sanity-check the model a run config names.
std::shared_ptr<const ml::model> load_run_model(const run_config& cfg);

}  // namespace scada::service
