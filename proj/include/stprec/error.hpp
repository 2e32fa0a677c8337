#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stprec {

enum class ErrorCode {
    not_found,
    validation_failed,
    duplicate,
    parse_error,
    unsupported_schema,
    io_error,
    internal,
};

inline std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::validation_failed: return "validation_failed";
    case ErrorCode::duplicate: return "duplicate";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::unsupported_schema: return "unsupported_schema";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::internal: return "internal";
    }
    return "internal";
}

/// Error raised by every library operation. `details` carries the full
/// violation list for validation failures.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::vector<std::string> details = {})
        : std::runtime_error(std::move(message)), code_(code), details_(std::move(details))
    {
    }

    ErrorCode code() const noexcept { return code_; }
    const std::vector<std::string>& details() const noexcept { return details_; }

private:
    ErrorCode code_;
    std::vector<std::string> details_;
};

} // namespace stprec
