#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace loadcast {

enum class ErrorCode {
    parse,
    malformed_row,
    duplicate_date,
    empty_series,
    degenerate_scale,
    insufficient_data,
    split,
    dimension,
    numeric,
    config,
    usage,
    convergence,
    search,
    validation,
    io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Everything the library throws. The CLI maps code() to an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

    // bad input or config, as opposed to numerics/environment
    [[nodiscard]] bool is_validation() const noexcept;

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::parse: return "parse error";
    case ErrorCode::malformed_row: return "malformed row";
    case ErrorCode::duplicate_date: return "duplicate date";
    case ErrorCode::empty_series: return "empty series";
    case ErrorCode::degenerate_scale: return "degenerate scale";
    case ErrorCode::insufficient_data: return "insufficient data";
    case ErrorCode::split: return "split error";
    case ErrorCode::dimension: return "dimension error";
    case ErrorCode::numeric: return "numeric error";
    case ErrorCode::config: return "config error";
    case ErrorCode::usage: return "usage error";
    case ErrorCode::convergence: return "convergence error";
    case ErrorCode::search: return "search error";
    case ErrorCode::validation: return "validation error";
    case ErrorCode::io: return "i/o error";
    }
    return "error";
}

inline bool Error::is_validation() const noexcept {
    switch (code_) {
    case ErrorCode::parse:
    case ErrorCode::malformed_row:
    case ErrorCode::duplicate_date:
    case ErrorCode::config:
    case ErrorCode::usage:
    case ErrorCode::validation:
        return true;
    default:
        return false;
    }
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, std::string(to_string(code)) + ": " + message);
}

// Re-raise with a location prefix, keeping the code and a single code label.
[[noreturn]] inline void fail_with_context(const Error& e, const std::string& context) {
    std::string_view what = e.what();
    const std::string label = std::string(to_string(e.code())) + ": ";
    if (what.starts_with(label)) {
        what.remove_prefix(label.size());
    }
    fail(e.code(), context + ": " + std::string(what));
}

}  // namespace loadcast
