#include "scada/modbus/frame.hpp"

#include <string>

namespace scada::modbus {

namespace {

void put16(bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

std::uint16_t get16(std::span<const std::uint8_t> in, std::size_t at) {
    return static_cast<std::uint16_t>((in[at] << 8) | in[at + 1]);
}

std::string hex_byte(std::uint8_t v) {
    static constexpr char digits[] = "0123456789ABCDEF";
    return std::string{'0', 'x', digits[v >> 4], digits[v & 0xF]};
}

bytes header(std::uint16_t txn, std::uint8_t unit, std::size_t pdu_size) {
    bytes out;
    out.reserve(mbap_header_size + pdu_size);
    put16(out, txn);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(pdu_size + 1));
    out.push_back(unit);
    return out;
}

struct mbap {
    std::uint16_t txn;
    std::uint8_t unit;
    std::uint8_t function;
};

// Validates the MBAP header against the frame and returns it with the function code.
mbap check_header(std::span<const std::uint8_t> frame) {
    if (frame.size() < mbap_header_size + 1) {
        throw protocol_error(protocol_reason::truncated, "frame shorter than MBAP header + function");
    }
    const std::uint16_t txn = get16(frame, 0);
    const std::uint8_t unit = frame[6];
    const std::uint8_t function = frame[7];
    if (get16(frame, 2) != 0) {
        throw protocol_error(protocol_reason::bad_protocol_id, "protocol id must be 0", txn, unit, function);
    }
    const std::size_t announced = get16(frame, 4);
    if (announced + 6 != frame.size()) {
        throw protocol_error(frame.size() < announced + 6 ? protocol_reason::truncated
                                                          : protocol_reason::length_mismatch,
                             "length field " + std::to_string(announced) + " does not match " +
                                 std::to_string(frame.size() - 6) + " remaining bytes",
                             txn, unit, function);
    }
    return {txn, unit, function};
}

}  // namespace

std::string_view to_string(protocol_reason reason) {
    switch (reason) {
    case protocol_reason::truncated: return "truncated";
    case protocol_reason::bad_protocol_id: return "bad_protocol_id";
    case protocol_reason::length_mismatch: return "length_mismatch";
    case protocol_reason::unsupported_function: return "unsupported_function";
    case protocol_reason::bad_quantity: return "bad_quantity";
    case protocol_reason::bad_byte_count: return "bad_byte_count";
    }
    return "unknown";
}

protocol_error::protocol_error(protocol_reason reason, std::string_view detail, std::uint16_t txn,
                               std::uint8_t unit, std::uint8_t function)
    : error("modbus " + std::string(to_string(reason)) + ": " + std::string(detail)),
      reason_(reason),
      txn_(txn),
      unit_(unit),
      function_(function) {}

bytes build_request(const read_request& req) {
    if (req.quantity < 1 || req.quantity > max_read_quantity) {
        throw protocol_error(protocol_reason::bad_quantity, "quantity must be in [1,125]", req.transaction_id,
                             req.unit_id, fn_read_holding_registers);
    }
    bytes out = header(req.transaction_id, req.unit_id, 5);
    out.push_back(fn_read_holding_registers);
    put16(out, req.start_addr);
    put16(out, req.quantity);
    return out;
}

read_request parse_request(std::span<const std::uint8_t> frame) {
    const mbap h = check_header(frame);
    if (h.function != fn_read_holding_registers) {
        throw protocol_error(protocol_reason::unsupported_function,
                             "function " + hex_byte(h.function) + " not served", h.txn, h.unit, h.function);
    }
    if (frame.size() != mbap_header_size + 5) {
        throw protocol_error(protocol_reason::truncated, "read request PDU must be 5 bytes", h.txn, h.unit,
                             h.function);
    }
    read_request req{h.txn, h.unit, get16(frame, 8), get16(frame, 10)};
    if (req.quantity < 1 || req.quantity > max_read_quantity) {
        throw protocol_error(protocol_reason::bad_quantity, "quantity must be in [1,125]", h.txn, h.unit,
                             h.function);
    }
    return req;
}

bytes build_response(const read_response& resp) {
    if (resp.values.empty() || resp.values.size() > max_read_quantity) {
        throw protocol_error(protocol_reason::bad_quantity, "response must carry 1..125 registers",
                             resp.transaction_id, resp.unit_id, fn_read_holding_registers);
    }
    const std::size_t byte_count = resp.values.size() * 2;
    bytes out = header(resp.transaction_id, resp.unit_id, 2 + byte_count);
    out.push_back(fn_read_holding_registers);
    out.push_back(static_cast<std::uint8_t>(byte_count));
    for (std::uint16_t v : resp.values) put16(out, v);
    return out;
}

bytes build_exception(const exception_response& resp) {
    bytes out = header(resp.transaction_id, resp.unit_id, 2);
    out.push_back(static_cast<std::uint8_t>(resp.function | 0x80));
    out.push_back(static_cast<std::uint8_t>(resp.code));
    return out;
}

response parse_response(std::span<const std::uint8_t> frame) {
    const mbap h = check_header(frame);
    if (h.function & 0x80) {
        if (frame.size() != mbap_header_size + 2) {
            throw protocol_error(protocol_reason::truncated, "exception PDU must be 2 bytes", h.txn, h.unit,
                                 h.function);
        }
        return exception_response{h.txn, h.unit, static_cast<std::uint8_t>(h.function & 0x7F),
                                  static_cast<exception_code>(frame[8])};
    }
    if (h.function != fn_read_holding_registers) {
        throw protocol_error(protocol_reason::unsupported_function, "unexpected function in response", h.txn,
                             h.unit, h.function);
    }
    if (frame.size() < mbap_header_size + 2) {
        throw protocol_error(protocol_reason::truncated, "missing byte count", h.txn, h.unit, h.function);
    }
    const std::size_t byte_count = frame[8];
    if (byte_count == 0 || byte_count % 2 != 0 || frame.size() != mbap_header_size + 2 + byte_count) {
        throw protocol_error(protocol_reason::bad_byte_count,
                             "byte count " + std::to_string(byte_count) + " inconsistent with frame", h.txn,
                             h.unit, h.function);
    }
    read_response resp{h.txn, h.unit, {}};
    resp.values.reserve(byte_count / 2);
    for (std::size_t i = 0; i < byte_count; i += 2) resp.values.push_back(get16(frame, 9 + i));
    return resp;
}

std::size_t frame_size_from_header(std::span<const std::uint8_t> header_bytes) {
    if (header_bytes.size() < mbap_header_size) {
        throw protocol_error(protocol_reason::truncated, "incomplete MBAP header");
    }
    if (get16(header_bytes, 2) != 0) {
        throw protocol_error(protocol_reason::bad_protocol_id, "protocol id must be 0", get16(header_bytes, 0),
                             header_bytes[6]);
    }
    const std::size_t length = get16(header_bytes, 4);
    if (length < 2) {
        throw protocol_error(protocol_reason::length_mismatch, "length field below minimum PDU",
                             get16(header_bytes, 0), header_bytes[6]);
    }
    return 6 + length;
}

}  // namespace scada::modbus
