#include "sentinel/error.hpp"

namespace sentinel {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::EmptyAfterNormalization: return "empty_after_normalization";
        case Errc::TooLong: return "too_long";
        case Errc::DimensionMismatch: return "dimension_mismatch";
        case Errc::SchemaError: return "schema_error";
        case Errc::DuplicateFrameRow: return "duplicate_frame_row";
        case Errc::FrameNotFound: return "frame_not_found";
        case Errc::BackendUnavailable: return "backend_unavailable";
        case Errc::ManifestSchemaError: return "manifest_schema_error";
        case Errc::NonMonotoneTimestamps: return "non_monotone_timestamps";
        case Errc::UnknownImageId: return "unknown_image_id";
        case Errc::ConfigError: return "config_error";
        case Errc::BindFailure: return "bind_failure";
        case Errc::NotFound: return "not_found";
        case Errc::Conflict: return "conflict";
        case Errc::InvalidArgument: return "invalid_argument";
        case Errc::IoError: return "io_error";
    }
    return "unknown";
}

}  // namespace sentinel
