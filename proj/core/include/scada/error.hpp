#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scada {

/// Base of every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The plant stepper produced or was handed a non-finite state.
class simulation_fault : public error {
public:
    using error::error;
};

/// A value violates a documented domain invariant (register range, config field, ...).
class validation_error : public error {
public:
    using error::error;
};

/// Bad or inconsistent configuration file content.
class config_error : public error {
public:
    using error::error;
};

/// Log structure is wrong (row groups, missing registers, bad CSV lines).
class structural_error : public error {
public:
    structural_error(const std::string& what, std::size_t line = 0)
        : error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    /// 1-based line in the offending file, 0 when not tied to a line.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class training_error : public error {
public:
    using error::error;
};

class dimension_error : public error {
public:
    using error::error;
};

}  // namespace scada
