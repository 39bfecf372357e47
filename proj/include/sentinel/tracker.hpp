#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sentinel/geometry.hpp"
#include "sentinel/metrics.hpp"
#include "sentinel/plate.hpp"

namespace sentinel {

inline constexpr double kDefaultIouAssoc = 0.3;
inline constexpr std::size_t kDefaultMaxAge = 5;

struct PlateObservation {
    CanonicalPlate plate;
    double text_confidence = 0.0;
};

struct FaceHit {
    std::string entry_id;
    double distance = 0.0;
};

/// Position of a frame within its camera's stream.
struct FrameStamp {
    std::uint64_t index = 0;
    std::string frame_id;
};

struct Track {
    std::uint64_t track_id = 0;
    BBox last_bbox;
    std::uint64_t first_frame = 0;
    std::uint64_t last_seen_frame = 0;
    std::string first_frame_id;
    std::string last_frame_id;
    std::size_t age_missed = 0;
    std::size_t frames_alive = 0;   // frames elapsed since the track opened, inclusive
    std::vector<PlateObservation> plate_history;   // observation order
    std::optional<FaceHit> face_best;              // nearest gallery hit so far
};

/// Monotone id source; ids start at 1 and are never reused.
class TrackIdSource {
public:
    std::uint64_t next() noexcept { return ++last_; }
    std::uint64_t last_issued() const noexcept { return last_; }

private:
    std::uint64_t last_ = 0;
};

struct AssociationResult {
    std::vector<Track> live;       // surviving tracks in input order, then new tracks
    std::vector<Track> retired;    // tracks whose age_missed exceeded max_age
    std::vector<std::uint64_t> detection_track;   // track id per detection
    std::vector<std::uint64_t> opened;            // ids created this step
};

/// One tracking step. Candidate (track, detection) pairs with IoU at or
/// above iou_assoc are taken greedily by descending IoU (ties: lower track
/// index, then lower detection index). Matched tracks adopt the detection
/// box and reset age_missed; unmatched detections open new tracks; unmatched
/// tracks age and retire once age_missed exceeds max_age.
///
/// Throws Error(InvalidArgument) unless iou_assoc is in (0, 1) and max_age >= 1.
AssociationResult associate(std::vector<Track> tracks, std::span<const Detection> detections,
                            const FrameStamp& stamp, TrackIdSource& ids,
                            double iou_assoc = kDefaultIouAssoc,
                            std::size_t max_age = kDefaultMaxAge);

/// Plate with the highest summed text confidence; ties go to the plate seen
/// first. Empty history yields nullopt.
std::optional<CanonicalPlate> consensus_plate(std::span<const PlateObservation> history);

}  // namespace sentinel
