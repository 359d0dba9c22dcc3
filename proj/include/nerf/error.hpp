#pragma once

#include <stdexcept>
#include <string>

namespace nerf {

enum class ErrorKind {
    invalid_spec,
    invalid_input,
    invalid_config,
    level_search_overflow,
    oracle_infeasible,
    io,
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::level_search_overflow: return "level-search-overflow";
    case ErrorKind::oracle_infeasible: return "oracle-infeasible";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace nerf
