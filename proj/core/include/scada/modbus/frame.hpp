#pragma once

#include "scada/error.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace scada::modbus {

using bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t fn_read_holding_registers = 0x03;
inline constexpr std::size_t mbap_header_size = 7;  ///< txn, protocol, length, unit
inline constexpr std::uint16_t max_read_quantity = 125;

enum class exception_code : std::uint8_t {
    illegal_function = 0x01,
    illegal_data_address = 0x02,
    illegal_data_value = 0x03,
};

enum class protocol_reason : std::uint8_t {
    truncated,
    bad_protocol_id,
    length_mismatch,
    unsupported_function,
    bad_quantity,
    bad_byte_count,
};

std::string_view to_string(protocol_reason reason);

/// Malformed or unsupported frame. Carries whatever header fields were decodable
/// so a server can still address an exception reply.
class protocol_error : public error {
public:
    protocol_error(protocol_reason reason, std::string_view detail, std::uint16_t txn = 0, std::uint8_t unit = 0,
                   std::uint8_t function = 0);

    protocol_reason reason() const noexcept { return reason_; }
    std::uint16_t transaction_id() const noexcept { return txn_; }
    std::uint8_t unit_id() const noexcept { return unit_; }
    std::uint8_t function() const noexcept { return function_; }

private:
    protocol_reason reason_;
    std::uint16_t txn_;
    std::uint8_t unit_;
    std::uint8_t function_;
};

struct read_request {
    std::uint16_t transaction_id = 0;
    std::uint8_t unit_id = 1;
    std::uint16_t start_addr = 0;
    std::uint16_t quantity = 1;

    bool operator==(const read_request&) const = default;
};

struct read_response {
    std::uint16_t transaction_id = 0;
    std::uint8_t unit_id = 1;
    std::vector<std::uint16_t> values;

    bool operator==(const read_response&) const = default;
};

struct exception_response {
    std::uint16_t transaction_id = 0;
    std::uint8_t unit_id = 1;
    std::uint8_t function = fn_read_holding_registers;
    exception_code code = exception_code::illegal_function;

    bool operator==(const exception_response&) const = default;
};

using response = std::variant<read_response, exception_response>;

/// Function 0x03 request. Throws protocol_error(bad_quantity) unless 1 <= qty <= 125.
bytes build_request(const read_request& req);
read_request parse_request(std::span<const std::uint8_t> frame);

bytes build_response(const read_response& resp);
bytes build_exception(const exception_response& resp);
response parse_response(std::span<const std::uint8_t> frame);

/// Total frame size announced by a complete MBAP header (6 + length field).
/// Throws protocol_error when the header is short or its protocol id is not 0.
std::size_t frame_size_from_header(std::span<const std::uint8_t> header);

}  // namespace scada::modbus
