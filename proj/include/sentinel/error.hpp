#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sentinel {

enum class Errc {
    EmptyAfterNormalization,
    TooLong,
    DimensionMismatch,
    SchemaError,
    DuplicateFrameRow,
    FrameNotFound,
    BackendUnavailable,
    ManifestSchemaError,
    NonMonotoneTimestamps,
    UnknownImageId,
    ConfigError,
    BindFailure,
    NotFound,
    Conflict,
    InvalidArgument,
    IoError,
};

/// Machine-readable snake_case name, used verbatim in API error bodies.
std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Schema errors carry the 1-based line of the offending record (0 if unknown).
class SchemaError : public Error {
public:
    SchemaError(Errc code, std::size_t line, const std::string& message)
        : Error(code, line ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace sentinel
