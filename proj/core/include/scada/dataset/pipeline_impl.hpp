#pragma once

#include "scada/error.hpp"

namespace scada::dataset {

namespace detail {
void warn_short_file(const std::string& file, std::size_t size, std::size_t n);
}

template <typename T>
std::map<std::string, std::vector<T>> apply_threshold(std::map<std::string, std::vector<T>> per_file, std::size_t n) {
    if (n == 0) throw validation_error("apply_threshold: N must be >= 1");
    for (auto& [file, items] : per_file) {
        if (items.size() < n) {
            detail::warn_short_file(file, items.size(), n);
        } else {
            items.erase(items.begin() + static_cast<std::ptrdiff_t>(n), items.end());
        }
    }
    return per_file;
}

}  // namespace scada::dataset
