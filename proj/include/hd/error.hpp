#pragma once

#include <stdexcept>
#include <string>

namespace hd {

enum class ErrorKind {
    invalid_argument,
    invalid_region,
    out_of_bounds,
    shape_mismatch,
    degenerate_input,
    unsupported_dimension,
    non_finite,
    io,
    format,
    /// Bad configuration value; the message names the key.
    config,
};

/// Base exception for every domain error raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) {
        throw Error(kind, what);
    }
}

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::invalid_region: return "invalid_region";
    case ErrorKind::out_of_bounds: return "out_of_bounds";
    case ErrorKind::shape_mismatch: return "shape_mismatch";
    case ErrorKind::degenerate_input: return "degenerate_input";
    case ErrorKind::unsupported_dimension: return "unsupported_dimension";
    case ErrorKind::non_finite: return "non_finite";
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::config: return "config";
    }
    return "unknown";
}

} // namespace hd
