#include "scada/modbus/tcp.hpp"

#include "scada/modbus/frame.hpp"

#include <boost/asio.hpp>
#include <spdlog/spdlog.h>

#include <array>

namespace scada::modbus {

namespace asio = boost::asio;
using asio::ip::tcp;

// ---------------------------------------------------------------------------
// Server

namespace {

bytes answer(std::span<const std::uint8_t> frame, const snapshot_channel& channel) {
    try {
        const read_request req = parse_request(frame);
        if (req.start_addr + req.quantity > register_count) {
            return build_exception({req.transaction_id, req.unit_id, fn_read_holding_registers,
                                    exception_code::illegal_data_address});
        }
        const auto snap = channel.latest();
        const register_file rf = snap ? *snap : register_file{};
        read_response resp{req.transaction_id, req.unit_id, {}};
        resp.values.assign(rf.regs.begin() + req.start_addr, rf.regs.begin() + req.start_addr + req.quantity);
        return build_response(resp);
    } catch (const protocol_error& e) {
        switch (e.reason()) {
        case protocol_reason::unsupported_function:
            return build_exception({e.transaction_id(), e.unit_id(), e.function(), exception_code::illegal_function});
        case protocol_reason::bad_quantity:
            return build_exception(
                {e.transaction_id(), e.unit_id(), e.function(), exception_code::illegal_data_value});
        default: throw;
        }
    }
}

}  // namespace

struct tcp_server::impl : std::enable_shared_from_this<tcp_server::impl> {
    impl(asio::io_context& io, const snapshot_channel& ch, const tcp::endpoint& ep) : acceptor(io), channel(ch) {
        boost::system::error_code ec;
        acceptor.open(ep.protocol(), ec);
        if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
        if (!ec) acceptor.bind(ep, ec);
        if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
        if (ec) {
            throw error("modbus server cannot listen on " + ep.address().to_string() + ":" +
                        std::to_string(ep.port()) + ": " + ec.message());
        }
        port = acceptor.local_endpoint().port();
    }

    struct session : std::enable_shared_from_this<session> {
        session(tcp::socket s, std::shared_ptr<impl> owner) : socket(std::move(s)), server(std::move(owner)) {}

        void read_header() {
            frame.resize(mbap_header_size);
            asio::async_read(socket, asio::buffer(frame),
                             [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                                 if (!ec) self->read_body();
                             });
        }

        void read_body() {
            std::size_t total = 0;
            try {
                total = frame_size_from_header(frame);
            } catch (const protocol_error& e) {
                spdlog::debug("modbus server: closing connection: {}", e.what());
                return;
            }
            frame.resize(total);
            asio::async_read(socket, asio::buffer(frame.data() + mbap_header_size, total - mbap_header_size),
                             [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                                 if (!ec) self->handle();
                             });
        }

        void handle() {
            if (server->flooded) {
                read_header();
                return;
            }
            try {
                reply = answer(frame, server->channel);
            } catch (const protocol_error& e) {
                spdlog::debug("modbus server: closing connection: {}", e.what());
                return;
            }
            ++server->served;
            asio::async_write(socket, asio::buffer(reply),
                              [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                                  if (!ec) self->read_header();
                              });
        }

        tcp::socket socket;
        std::shared_ptr<impl> server;
        bytes frame;
        bytes reply;
    };

    void accept() {
        acceptor.async_accept([self = shared_from_this()](boost::system::error_code ec, tcp::socket socket) {
            if (ec) return;
            socket.set_option(tcp::no_delay(true));
            std::make_shared<session>(std::move(socket), self)->read_header();
            self->accept();
        });
    }

    tcp::acceptor acceptor;
    const snapshot_channel& channel;
    std::atomic<bool> flooded{false};
    std::atomic<std::uint64_t> served{0};
    std::uint16_t port = 0;
};

tcp_server::tcp_server(asio::io_context& io, const snapshot_channel& channel, std::uint16_t port,
                       std::string bind_address)
    : impl_(std::make_shared<impl>(io, channel, tcp::endpoint(asio::ip::make_address(bind_address), port))) {}

tcp_server::~tcp_server() { stop(); }

void tcp_server::start() { impl_->accept(); }

void tcp_server::stop() {
    boost::system::error_code ec;
    impl_->acceptor.close(ec);
}

std::uint16_t tcp_server::port() const { return impl_->port; }

void tcp_server::set_flooded(bool flooded) { impl_->flooded = flooded; }

std::uint64_t tcp_server::requests_served() const { return impl_->served; }

// ---------------------------------------------------------------------------
// Client

struct tcp_client::impl {
    impl(std::string h, std::uint16_t p, std::chrono::milliseconds t, std::uint8_t u)
        : host(std::move(h)), port(p), timeout(t), unit(u), socket(io) {}

    // Runs queued operations until `done` or the timeout. On timeout the socket is
    // closed so a late reply can never be mistaken for the next one.
    bool run_until(const bool& done) {
        io.restart();
        io.run_for(timeout);
        if (done) return true;
        boost::system::error_code ec;
        socket.close(ec);
        io.restart();
        io.run();
        return false;
    }

    bool ensure_connected() {
        if (socket.is_open()) return true;
        tcp::resolver resolver(io);
        boost::system::error_code ec;
        auto endpoints = resolver.resolve(host, std::to_string(port), ec);
        if (ec) return false;
        bool done = false;
        boost::system::error_code result;
        asio::async_connect(socket, endpoints, [&](boost::system::error_code e, const tcp::endpoint&) {
            result = e;
            done = true;
        });
        if (!run_until(done) || result) {
            socket.close(ec);
            return false;
        }
        socket.set_option(tcp::no_delay(true), ec);
        return true;
    }

    std::optional<bytes> exchange(const bytes& request) {
        if (!ensure_connected()) return std::nullopt;
        bool done = false;
        boost::system::error_code result;
        bytes reply(mbap_header_size);
        asio::async_write(socket, asio::buffer(request), [&](boost::system::error_code e, std::size_t) {
            if (e) {
                result = e;
                done = true;
                return;
            }
            asio::async_read(socket, asio::buffer(reply), [&](boost::system::error_code e2, std::size_t) {
                if (e2) {
                    result = e2;
                    done = true;
                    return;
                }
                std::size_t total = 0;
                try {
                    total = frame_size_from_header(reply);
                } catch (const protocol_error&) {
                    result = asio::error::invalid_argument;
                    done = true;
                    return;
                }
                reply.resize(total);
                asio::async_read(socket, asio::buffer(reply.data() + mbap_header_size, total - mbap_header_size),
                                 [&](boost::system::error_code e3, std::size_t) {
                                     result = e3;
                                     done = true;
                                 });
            });
        });
        if (!run_until(done) || result) {
            boost::system::error_code ec;
            socket.close(ec);
            return std::nullopt;
        }
        return reply;
    }

    std::string host;
    std::uint16_t port;
    std::chrono::milliseconds timeout;
    std::uint8_t unit;
    std::uint16_t next_txn = 1;
    asio::io_context io;
    tcp::socket socket;
};

tcp_client::tcp_client(std::string host, std::uint16_t port, std::chrono::milliseconds timeout, std::uint8_t unit_id)
    : impl_(std::make_unique<impl>(std::move(host), port, timeout, unit_id)) {}

tcp_client::~tcp_client() = default;

std::optional<bytes> tcp_client::exchange(const bytes& frame) { return impl_->exchange(frame); }

std::optional<std::vector<std::uint16_t>> tcp_client::read(std::uint16_t start, std::uint16_t quantity) {
    const std::uint16_t txn = impl_->next_txn++;
    const auto reply = impl_->exchange(build_request({txn, impl_->unit, start, quantity}));
    if (!reply) return std::nullopt;
    try {
        const response resp = parse_response(*reply);
        if (const auto* ok = std::get_if<read_response>(&resp)) {
            if (ok->transaction_id == txn && ok->values.size() == quantity) return ok->values;
        }
    } catch (const protocol_error& e) {
        spdlog::warn("modbus client: bad reply: {}", e.what());
    }
    return std::nullopt;
}

}  // namespace scada::modbus
