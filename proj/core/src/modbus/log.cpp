#include "scada/modbus/log.hpp"

#include "scada/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace scada::modbus {

namespace {

namespace chr = std::chrono;

constexpr std::int64_t tenths_per_day = 864000;

std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

log_time from_civil(int y, unsigned m, unsigned d, std::int64_t tenths_of_day) {
    const chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
    if (!ymd.ok()) throw validation_error("invalid calendar date");
    const auto days = chr::sys_days{ymd}.time_since_epoch().count();
    return {days * tenths_per_day + tenths_of_day};
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n\"");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n\"");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == delim && !quoted) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::vector<int> numbers_in(std::string_view s) {
    std::vector<int> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            int v = 0;
            auto [p, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
            if (ec != std::errc{}) throw validation_error("number out of range");
            out.push_back(v);
            i = static_cast<std::size_t>(p - s.data());
        } else {
            ++i;
        }
    }
    return out;
}

log_time parse_date(std::string_view s, log_mapping::date_order order) {
    auto n = numbers_in(s);
    if (n.size() != 3) throw validation_error("bad date '" + std::string(s) + "'");
    switch (order) {
    case log_mapping::date_order::iso: return from_civil(n[0], n[1], n[2], 0);
    case log_mapping::date_order::dmy: return from_civil(n[2], n[1], n[0], 0);
    case log_mapping::date_order::mdy: return from_civil(n[2], n[0], n[1], 0);
    }
    return {};
}

// HH:MM:SS[.fraction], rounded to the nearest tenth.
std::int64_t parse_time_of_day(std::string_view s) {
    const auto colon1 = s.find(':');
    const auto colon2 = s.find(':', colon1 == std::string_view::npos ? 0 : colon1 + 1);
    if (colon1 == std::string_view::npos || colon2 == std::string_view::npos) {
        throw validation_error("bad time '" + std::string(s) + "'");
    }
    int h = 0, m = 0;
    double sec = 0;
    try {
        h = std::stoi(std::string(s.substr(0, colon1)));
        m = std::stoi(std::string(s.substr(colon1 + 1, colon2 - colon1 - 1)));
        std::string rest(s.substr(colon2 + 1));
        std::replace(rest.begin(), rest.end(), ',', '.');
        std::size_t used = 0;
        sec = std::stod(rest, &used);
        if (trim(rest.substr(used)).size() != 0) throw validation_error("trailing characters");
    } catch (const std::exception&) {
        throw validation_error("bad time '" + std::string(s) + "'");
    }
    if (h < 0 || h > 23 || m < 0 || m > 59 || sec < 0 || sec >= 61) {
        throw validation_error("time out of range '" + std::string(s) + "'");
    }
    return static_cast<std::int64_t>(h) * 36000 + m * 600 + std::llround(sec * 10.0);
}

std::size_t resolve(const log_mapping::column& col, const std::vector<std::string>& header) {
    if (const auto* idx = std::get_if<std::size_t>(&col)) return *idx;
    const auto& name = std::get<std::string>(col);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw config_error("mapping: column '" + name + "' not found in header");
}

log_mapping::column column_from_json(const nlohmann::json& j) {
    if (j.is_number_unsigned()) return j.get<std::size_t>();
    if (j.is_string()) return j.get<std::string>();
    throw config_error("mapping: a column must be a header name or a 0-based index");
}

}  // namespace

log_time default_log_epoch() { return from_civil(2018, 3, 1, 10 * 36000); }

std::string format_date(log_time t) {
    const std::int64_t days = floor_div(t.tenths, tenths_per_day);
    const chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_time(log_time t) {
    const std::int64_t tod = t.tenths - floor_div(t.tenths, tenths_per_day) * tenths_per_day;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld.%lld", static_cast<long long>(tod / 36000),
                  static_cast<long long>(tod / 600 % 60), static_cast<long long>(tod / 10 % 60),
                  static_cast<long long>(tod % 10));
    return buf;
}

std::string format_iso8601(log_time t) { return format_date(t) + "T" + format_time(t) + "Z"; }

void write_log(std::ostream& out, const std::vector<log_row>& rows) {
    out << log_header << '\n';
    log_time cached{-1};
    std::string stamp;
    for (const auto& r : rows) {
        if (r.time != cached) {
            cached = r.time;
            stamp = format_date(r.time) + ',' + format_time(r.time);
        }
        out << stamp << ',' << static_cast<int>(r.register_number) << ',' << r.value << '\n';
    }
}

void write_log(const std::filesystem::path& path, const std::vector<log_row>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write " + path.string());
    write_log(out, rows);
    if (!out) throw error("write failed for " + path.string());
}

log_mapping log_mapping::from_json(const nlohmann::json& j) {
    log_mapping m;
    if (j.contains("delimiter")) {
        auto d = j.at("delimiter").get<std::string>();
        if (d == "\\t") d = "\t";
        if (d.size() != 1) throw config_error("mapping: delimiter must be one character");
        m.delimiter = d[0];
    }
    m.has_header = j.value("has_header", true);
    m.skip_lines = j.value("skip_lines", std::size_t{0});
    if (j.contains("columns")) {
        const auto& c = j.at("columns");
        if (c.contains("date")) m.date = column_from_json(c.at("date"));
        if (c.contains("time")) m.time = column_from_json(c.at("time"));
        if (c.contains("datetime")) m.datetime = column_from_json(c.at("datetime"));
        if (c.contains("register")) m.register_number = column_from_json(c.at("register"));
        if (c.contains("value")) m.value = column_from_json(c.at("value"));
    }
    const auto order = j.value("date_format", std::string("iso"));
    if (order == "iso") {
        m.dates = date_order::iso;
    } else if (order == "dmy") {
        m.dates = date_order::dmy;
    } else if (order == "mdy") {
        m.dates = date_order::mdy;
    } else {
        throw config_error("mapping: date_format must be iso, dmy or mdy");
    }
    if (j.contains("files")) {
        for (const auto& [file, label] : j.at("files").items()) m.file_labels.emplace_back(file, label.get<std::string>());
    }
    if (!m.has_header) {
        auto named = [](const column& c) { return std::holds_alternative<std::string>(c); };
        const bool stamp_named = m.datetime ? named(*m.datetime) : named(m.date) || named(m.time);
        if (stamp_named || named(m.register_number) || named(m.value)) {
            throw config_error("mapping: headerless files need index columns");
        }
    }
    return m;
}

log_mapping log_mapping::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open mapping config " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw config_error("mapping config " + path.string() + ": " + e.what());
    }
}

std::vector<log_row> read_log(std::istream& in, const log_mapping& mapping) {
    std::string line;
    std::size_t line_no = 0;
    for (std::size_t i = 0; i < mapping.skip_lines && std::getline(in, line); ++i) ++line_no;

    std::vector<std::string> header;
    if (mapping.has_header) {
        if (!std::getline(in, line)) return {};
        ++line_no;
        header = split(line, mapping.delimiter);
    }
    std::size_t c_date = 0, c_time = 0, c_dt = 0;
    const bool combined = mapping.datetime.has_value();
    if (combined) {
        c_dt = resolve(*mapping.datetime, header);
    } else {
        c_date = resolve(mapping.date, header);
        c_time = resolve(mapping.time, header);
    }
    const std::size_t c_reg = resolve(mapping.register_number, header);
    const std::size_t c_val = resolve(mapping.value, header);
    const std::size_t needed = std::max({c_date, c_time, c_dt, c_reg, c_val}) + 1;

    std::vector<log_row> rows;
    std::vector<std::size_t> lines;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line, mapping.delimiter);
        if (fields.size() < needed) throw structural_error("too few columns", line_no);
        log_row row;
        try {
            if (combined) {
                const std::string& dt = fields[c_dt];
                const auto sep = dt.find_first_of(" T");
                if (sep == std::string::npos) throw validation_error("datetime without separator");
                row.time = {parse_date(dt.substr(0, sep), mapping.dates).tenths + parse_time_of_day(trim(dt.substr(sep + 1)))};
            } else {
                row.time = {parse_date(fields[c_date], mapping.dates).tenths + parse_time_of_day(fields[c_time])};
            }
            const auto reg = numbers_in(fields[c_reg]);
            if (reg.empty() || reg.back() < 0 || reg.back() >= static_cast<int>(register_count)) {
                throw validation_error("register number '" + fields[c_reg] + "' outside 0..9");
            }
            row.register_number = static_cast<std::uint8_t>(reg.back());
            long long value = std::stoll(fields[c_val]);
            if (value < -32768 || value > 65535) throw validation_error("register value out of 16-bit range");
            row.value = static_cast<std::uint16_t>(value);
        } catch (const structural_error&) {
            throw;
        } catch (const std::exception& e) {
            throw structural_error(std::string("unparsable row: ") + e.what(), line_no);
        }
        rows.push_back(row);
        lines.push_back(line_no);
    }

    // Rows of one timestamp must come in groups of exactly ten.
    std::size_t begin = 0;
    while (begin < rows.size()) {
        std::size_t end = begin;
        while (end < rows.size() && rows[end].time == rows[begin].time) ++end;
        if (end - begin != register_count) {
            throw structural_error("timestamp " + format_date(rows[begin].time) + " " + format_time(rows[begin].time) +
                                       " has " + std::to_string(end - begin) + " rows, expected 10",
                                   lines[begin]);
        }
        begin = end;
    }
    return rows;
}

std::vector<log_row> read_log(const std::filesystem::path& path, const log_mapping& mapping) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open log " + path.string());
    return read_log(in, mapping);
}

std::vector<log_row> rows_for(const register_file& rf, log_time time) {
    std::vector<log_row> rows;
    rows.reserve(register_count);
    for (std::size_t i = 0; i < register_count; ++i) {
        rows.push_back({time, static_cast<std::uint8_t>(i), rf.regs[i]});
    }
    return rows;
}

}  // namespace scada::modbus
