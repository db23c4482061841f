#include "scada/service/server.hpp"

#include "scada/error.hpp"
#include "scada/modbus/tcp.hpp"
#include "scada/plant/config.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <deque>
#include <fstream>
#include <unordered_set>

namespace scada::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

// A client that falls this far behind is dropped rather than buffered forever.
constexpr std::size_t max_queued_messages = 4096;

class ws_session;

}  // namespace

namespace detail {

struct server_state : std::enable_shared_from_this<server_state> {
    server_state(asio::io_context& io_, std::shared_ptr<const ml::model> model, live_options live, server_options opts)
        : io(io_), options(std::move(opts)), loop(std::move(model), live), acceptor(io_), timer(io_) {
        if (!(options.speed > 0)) throw config_error("server: speed must be positive");
        const auto address = asio::ip::make_address(options.bind_address);
        const tcp::endpoint ep(address, options.http_port);
        beast::error_code ec;
        acceptor.open(ep.protocol(), ec);
        if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
        if (!ec) acceptor.bind(ep, ec);
        if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
        if (ec) {
            throw error(fmt::format("cannot listen on {}:{}: {}", options.bind_address, options.http_port, ec.message()));
        }
        if (options.serve_modbus) {
            modbus = std::make_unique<modbus::tcp_server>(io, loop.channel(), options.modbus_port, options.bind_address);
            loop.on_flood_change([m = modbus.get()](bool flooded) { m->set_flooded(flooded); });
        }
        if (!options.output_dir.empty()) {
            std::filesystem::create_directories(options.output_dir);
            alert_log.open(options.output_dir / "alerts.jsonl", std::ios::app);
            if (!alert_log) throw error("cannot write " + (options.output_dir / "alerts.jsonl").string());
        }
        period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(live.params.poll_dt_s / options.speed));
    }

    void start();
    void stop();
    void do_accept();
    void schedule_tick();
    void tick();
    void broadcast(const envelope& e);
    void on_message(const std::shared_ptr<ws_session>& from, const std::string& text);
    http::response<http::string_body> handle(const http::request<http::string_body>& req) const;
    nlohmann::json health() const;
    std::string metrics() const;

    asio::io_context& io;
    server_options options;
    live_loop loop;
    tcp::acceptor acceptor;
    asio::steady_timer timer;
    std::unique_ptr<modbus::tcp_server> modbus;
    std::unordered_set<ws_session*> sessions;
    std::ofstream alert_log;
    std::chrono::steady_clock::duration period{};
    std::size_t next_schedule = 0;
    bool running = false;
    bool finished = false;

    std::uint64_t messages_sent = 0;
    std::uint64_t operator_applied = 0;
    std::uint64_t operator_rejected = 0;
    mutable std::uint64_t http_requests = 0;
    std::uint64_t ws_connections = 0;
    std::uint64_t ws_dropped = 0;
};

}  // namespace detail

using detail::server_state;

namespace {

class ws_session : public std::enable_shared_from_this<ws_session> {
public:
    ws_session(tcp::socket socket, std::weak_ptr<server_state> srv) : ws_(std::move(socket)), srv_(std::move(srv)) {}

    ~ws_session() {
        if (auto s = srv_.lock()) s->sessions.erase(this);
    }

    void run(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, beast::bind_front_handler(&ws_session::on_accept, shared_from_this()));
    }

    void send(std::shared_ptr<const std::string> text) {
        if (closed_) return;
        if (queue_.size() >= max_queued_messages) {
            if (auto s = srv_.lock()) ++s->ws_dropped;
            close();
            return;
        }
        queue_.push_back(std::move(text));
        if (queue_.size() == 1) do_write();
    }

    void close() {
        if (closed_) return;
        closed_ = true;
        if (auto s = srv_.lock()) s->sessions.erase(this);
        beast::error_code ec;
        beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
        beast::get_lowest_layer(ws_).close();
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        auto s = srv_.lock();
        if (!s || !s->running) return;
        s->sessions.insert(this);
        ++s->ws_connections;
        do_read();
    }

    void do_read() { ws_.async_read(buffer_, beast::bind_front_handler(&ws_session::on_read, shared_from_this())); }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            close();
            return;
        }
        auto text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        if (auto s = srv_.lock()) s->on_message(shared_from_this(), text);
        if (!closed_) do_read();
    }

    void do_write() {
        ws_.text(true);
        ws_.async_write(asio::buffer(*queue_.front()),
                        beast::bind_front_handler(&ws_session::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) {
            close();
            return;
        }
        queue_.pop_front();
        if (!queue_.empty() && !closed_) do_write();
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::shared_ptr<const std::string>> queue_;
    std::weak_ptr<server_state> srv_;
    bool closed_ = false;
};

class http_session : public std::enable_shared_from_this<http_session> {
public:
    http_session(tcp::socket socket, std::weak_ptr<server_state> srv) : stream_(std::move(socket)), srv_(std::move(srv)) {}

    void run() { do_read(); }

private:
    void do_read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&http_session::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
            return;
        }
        auto s = srv_.lock();
        if (!s) return;
        if (websocket::is_upgrade(req_) && req_.target() == "/ws") {
            stream_.expires_never();
            std::make_shared<ws_session>(stream_.release_socket(), srv_)->run(std::move(req_));
            return;
        }
        auto res = std::make_shared<http::response<http::string_body>>(s->handle(req_));
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code wec, std::size_t) {
            if (wec) return;
            if (res->need_eof()) {
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, wec);
                return;
            }
            self->do_read();
        });
    }

    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
    std::weak_ptr<server_state> srv_;
};

}  // namespace

void server_state::start() {
    if (running) return;
    running = true;
    do_accept();
    if (modbus) modbus->start();
    timer.expires_after(period);
    schedule_tick();
}

void server_state::stop() {
    if (!running) return;
    running = false;
    beast::error_code ec;
    acceptor.close(ec);
    timer.cancel();
    if (modbus) modbus->stop();
    // close() erases from the set, so iterate over a copy.
    std::vector<ws_session*> open(sessions.begin(), sessions.end());
    for (auto* s : open) s->close();
    sessions.clear();
}

void server_state::do_accept() {
    acceptor.async_accept(asio::make_strand(io), [self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
        if (!self->running) return;
        if (!ec) std::make_shared<http_session>(std::move(socket), self)->run();
        self->do_accept();
    });
}

void server_state::schedule_tick() {
    timer.async_wait([self = shared_from_this()](beast::error_code ec) {
        if (ec || !self->running) return;
        self->tick();
        if (self->finished) return;
        // Fixed-rate: the next deadline is relative to the previous one, not to now.
        self->timer.expires_at(self->timer.expiry() + self->period);
        self->schedule_tick();
    });
}

void server_state::tick() {
    while (next_schedule < options.schedule.size() &&
           options.schedule[next_schedule].time_s <= loop.sim_time_s() + 1e-9) {
        operator_message m{inject_request{options.schedule[next_schedule].scenario},
                           nlohmann::json("schedule-" + std::to_string(next_schedule))};
        if (auto rejected = loop.submit(std::move(m))) broadcast(*rejected);
        ++next_schedule;
    }
    for (const auto& e : loop.step()) {
        if (e.type == "alert" && alert_log.is_open()) alert_log << e.to_json().dump() << '\n' << std::flush;
        broadcast(e);
    }
    if (options.max_ticks && loop.ticks() >= options.max_ticks) {
        finished = true;
        spdlog::info("reached {} ticks, stopping", options.max_ticks);
        stop();
    }
}

void server_state::broadcast(const envelope& e) {
    auto text = std::make_shared<const std::string>(e.to_json().dump());
    std::vector<ws_session*> targets(sessions.begin(), sessions.end());
    for (auto* s : targets) {
        s->send(text);
        ++messages_sent;
    }
}

void server_state::on_message(const std::shared_ptr<ws_session>& from, const std::string& text) {
    auto parsed = parse_operator_message(text);
    std::optional<envelope> rejection;
    if (!parsed.message) {
        rejection = loop.reject(parsed.id, parsed.error);
    } else {
        rejection = loop.submit(std::move(*parsed.message));
    }
    if (rejection) {
        ++operator_rejected;
        from->send(std::make_shared<const std::string>(rejection->to_json().dump()));
        ++messages_sent;
    } else {
        ++operator_applied;
    }
}

nlohmann::json server_state::health() const {
    const auto& m = loop.model();
    return {{"status", running ? "ok" : "stopped"},
            {"ticks", loop.ticks()},
            {"sim_time_s", loop.sim_time_s()},
            {"scenario", plant::to_string(loop.scenario())},
            {"policy", siem::to_json(loop.policy())},
            {"model", {{"algorithm", ml::to_string(m.kind())}, {"task", dataset::to_string(m.task())}}},
            {"clients", sessions.size()},
            {"modbus_port", modbus ? modbus->port() : 0}};
}

std::string server_state::metrics() const {
    std::string out;
    auto metric = [&out](std::string_view name, std::string_view type, std::string_view help, auto value) {
        out += fmt::format("# HELP {} {}\n# TYPE {} {}\n{} {}\n", name, help, name, type, name, value);
    };
    metric("scada_ticks_total", "counter", "Control cycles run.", loop.ticks());
    metric("scada_sim_time_seconds", "gauge", "Simulated time since start.", loop.sim_time_s());
    metric("scada_alerts_total", "counter", "Alerts emitted.", loop.alerts_emitted());
    metric("scada_poll_timeouts_total", "counter", "Poll requests that timed out.", loop.poll_timeouts());
    metric("scada_ws_clients", "gauge", "Connected WebSocket clients.", sessions.size());
    metric("scada_ws_connections_total", "counter", "WebSocket connections accepted.", ws_connections);
    metric("scada_ws_dropped_total", "counter", "Clients dropped for falling behind.", ws_dropped);
    metric("scada_ws_messages_sent_total", "counter", "Messages queued to clients.", messages_sent);
    out += "# HELP scada_operator_messages_total Operator messages received.\n"
           "# TYPE scada_operator_messages_total counter\n";
    out += fmt::format("scada_operator_messages_total{{result=\"accepted\"}} {}\n", operator_applied);
    out += fmt::format("scada_operator_messages_total{{result=\"rejected\"}} {}\n", operator_rejected);
    metric("scada_http_requests_total", "counter", "Plain HTTP requests served.", http_requests);
    if (modbus) metric("scada_modbus_requests_total", "counter", "Modbus requests answered.", modbus->requests_served());
    return out;
}

http::response<http::string_body> server_state::handle(const http::request<http::string_body>& req) const {
    ++http_requests;
    http::response<http::string_body> res;
    res.version(req.version());
    res.keep_alive(req.keep_alive());
    res.set(http::field::server, "scada-siem");
    res.set(http::field::access_control_allow_origin, "*");
    auto reply = [&](http::status status, std::string_view type, std::string body) {
        res.result(status);
        res.set(http::field::content_type, beast::string_view(type.data(), type.size()));
        res.body() = std::move(body);
        res.prepare_payload();
        return res;
    };
    const auto target = req.target();
    if (req.method() != http::verb::get && req.method() != http::verb::head) {
        return reply(http::status::method_not_allowed, "application/json", R"({"error":"only GET is supported"})");
    }
    if (target == "/health") return reply(http::status::ok, "application/json", health().dump());
    if (target == "/metrics") return reply(http::status::ok, "text/plain; version=0.0.4", metrics());
    if (target == "/ws") {
        return reply(http::status::upgrade_required, "application/json", R"({"error":"websocket upgrade required"})");
    }
    return reply(http::status::not_found, "application/json", R"({"error":"not found"})");
}

server::server(asio::io_context& io, std::shared_ptr<const ml::model> model, live_options live, server_options options)
    : impl_(std::make_shared<server_state>(io, std::move(model), live, std::move(options))) {}

server::~server() {
    if (impl_) impl_->stop();
}

void server::start() { impl_->start(); }
void server::stop() { impl_->stop(); }
std::uint16_t server::http_port() const { return impl_->acceptor.is_open() ? impl_->acceptor.local_endpoint().port() : 0; }
std::uint16_t server::modbus_port() const { return impl_->modbus ? impl_->modbus->port() : 0; }
bool server::finished() const { return impl_->finished; }
nlohmann::json server::health() const { return impl_->health(); }
std::string server::metrics() const { return impl_->metrics(); }

std::shared_ptr<const ml::model> load_run_model(const run_config& cfg) {
    if (cfg.model_path.empty()) throw config_error("no model given; train one and pass --model");
    if (!std::filesystem::is_regular_file(cfg.model_path)) {
        throw config_error("model file not found: " + cfg.model_path.string());
    }
    return std::make_shared<const ml::model>(ml::model::load(cfg.model_path));
}

void serve(const run_config& cfg) {
    cfg.validate();
    auto model = load_run_model(cfg);
    live_options live;
    if (!cfg.plant_config.empty()) {
        const auto sim = plant::simulation_config::load(cfg.plant_config);
        live.params = sim.plant;
        live.models = sim.models;
    }
    live.seed = cfg.seed;
    live.policy = cfg.policy;

    server_options opts;
    opts.bind_address = cfg.bind_address;
    opts.http_port = cfg.http_port;
    opts.modbus_port = cfg.modbus_port;
    opts.speed = cfg.speed;
    opts.schedule = cfg.schedule;
    opts.max_ticks = cfg.max_ticks;
    opts.output_dir = cfg.output_dir;

    asio::io_context io;
    server srv(io, std::move(model), live, opts);
    asio::signal_set signals(io, SIGINT, SIGTERM);
    signals.async_wait([&](beast::error_code ec, int) {
        if (ec) return;
        spdlog::info("shutting down");
        srv.stop();
        io.stop();
    });
    srv.start();
    spdlog::info("http+ws on {}:{}, modbus on port {}", cfg.bind_address, srv.http_port(), srv.modbus_port());
    while (!io.stopped()) {
        io.run_for(std::chrono::milliseconds(200));
        if (srv.finished()) break;
    }
}

}  // namespace scada::service
