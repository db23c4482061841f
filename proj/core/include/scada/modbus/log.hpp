#pragma once

#include "scada/modbus/registers.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace scada::modbus {

/// Wall-clock instant with 0.1 s resolution: tenths of a second since 1970-01-01T00:00:00.
struct log_time {
    std::int64_t tenths = 0;

    double seconds() const { return static_cast<double>(tenths) / 10.0; }
    auto operator<=>(const log_time&) const = default;
};

/// Default epoch of generated logs: 2018-03-01 10:00:00.0.
log_time default_log_epoch();

std::string format_date(log_time t);  ///< YYYY-MM-DD
std::string format_time(log_time t);  ///< HH:MM:SS.f
std::string format_iso8601(log_time t);  ///< YYYY-MM-DDTHH:MM:SS.fZ

/// One register of one instance as written by the logger.
struct log_row {
    log_time time;
    std::uint8_t register_number = 0;
    std::uint16_t value = 0;

    bool operator==(const log_row&) const = default;
};

inline constexpr const char* log_header = "date,time,register,value";

void write_log(std::ostream& out, const std::vector<log_row>& rows);
void write_log(const std::filesystem::path& path, const std::vector<log_row>& rows);

/// Column layout of a foreign CSV file. A column is either a header name or a 0-based index.
struct log_mapping {
    using column = std::variant<std::string, std::size_t>;
    enum class date_order : std::uint8_t { iso, dmy, mdy };

    char delimiter = ',';
    bool has_header = true;
    std::size_t skip_lines = 0;
    column date = std::string("date");
    column time = std::string("time");
    /// When set, one column holds "date time" and `date`/`time` are ignored.
    std::optional<column> datetime;
    column register_number = std::string("register");
    column value = std::string("value");
    date_order dates = date_order::iso;
    /// Optional file name -> scenario id labels for ingestion.
    std::vector<std::pair<std::string, std::string>> file_labels;

    static log_mapping native() { return {}; }
    static log_mapping from_json(const nlohmann::json& j);
    static log_mapping load(const std::filesystem::path& path);
};

/// Parse a log. Rows sharing a timestamp must come in groups of exactly 10;
/// otherwise structural_error with the 1-based line where the bad group starts.
std::vector<log_row> read_log(std::istream& in, const log_mapping& mapping = log_mapping::native());
std::vector<log_row> read_log(const std::filesystem::path& path, const log_mapping& mapping = log_mapping::native());

/// The 10 rows of one instance, stamped with `time`.
std::vector<log_row> rows_for(const register_file& rf, log_time time);

}  // namespace scada::modbus
