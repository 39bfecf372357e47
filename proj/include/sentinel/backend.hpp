#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/face.hpp"
#include "sentinel/metrics.hpp"

namespace sentinel {

struct FrameRef {
    std::string frame_id;
    std::string camera_id;
    std::int64_t timestamp_ms = 0;
    std::string image_path;
};

/// Detection class ids used by every backend.
inline constexpr int kPlateClass = 0;
inline constexpr int kFaceClass = 1;

struct PlateReading {
    Detection detection;
    std::string raw_text;
    double text_confidence = 0.0;
};

struct FaceObservation {
    Detection detection;
    Embedding embedding;
};

/// Plate detection + OCR and face detection + embedding for one frame.
/// Implementations must tolerate concurrent calls.
class DetectorBackend {
public:
    virtual ~DetectorBackend() = default;

    virtual std::string_view name() const noexcept = 0;
    virtual std::vector<PlateReading> detect_plates(const FrameRef& frame) const = 0;
    virtual std::vector<FaceObservation> detect_faces(const FrameRef& frame) const = 0;
};

/// Closed-world fixture backend: frames absent from the fixture have no
/// detections. Immutable after load.
class StubBackend final : public DetectorBackend {
public:
    StubBackend() = default;

    /// Reads a line-delimited fixture. Throws SchemaError (with line number)
    /// for malformed rows and for a frame whose rows are split across two
    /// separate blocks or repeat an identical row (Errc::DuplicateFrameRow).
    static StubBackend load(const std::filesystem::path& path, std::size_t embedding_dim);
    static StubBackend parse(std::istream& in, std::size_t embedding_dim);

    std::string_view name() const noexcept override { return "stub"; }
    std::vector<PlateReading> detect_plates(const FrameRef& frame) const override;
    std::vector<FaceObservation> detect_faces(const FrameRef& frame) const override;

    std::size_t frame_count() const noexcept { return frames_.size(); }

private:
    struct FrameRows {
        std::vector<PlateReading> plates;
        std::vector<FaceObservation> faces;
    };
    std::map<std::string, FrameRows, std::less<>> frames_;
};

/// Convenience alias matching the operation name used in docs and tools.
inline StubBackend load_stub_fixture(const std::filesystem::path& path,
                                     std::size_t embedding_dim) {
    return StubBackend::load(path, embedding_dim);
}

/// Decorator that checks every result at the interface boundary (box sanity,
/// confidence ranges, embedding dimension) and orders results by descending
/// confidence. Violations throw Error(SchemaError) naming the backend.
class ValidatingBackend final : public DetectorBackend {
public:
    ValidatingBackend(std::shared_ptr<const DetectorBackend> inner, std::size_t embedding_dim)
        : inner_(std::move(inner)), embedding_dim_(embedding_dim) {}

    std::string_view name() const noexcept override { return inner_->name(); }
    std::vector<PlateReading> detect_plates(const FrameRef& frame) const override;
    std::vector<FaceObservation> detect_faces(const FrameRef& frame) const override;

private:
    std::shared_ptr<const DetectorBackend> inner_;
    std::size_t embedding_dim_;
};

}  // namespace sentinel
