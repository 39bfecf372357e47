#include "sentinel/tracker.hpp"

#include <algorithm>
#include <tuple>

#include "sentinel/error.hpp"

namespace sentinel {

AssociationResult associate(std::vector<Track> tracks, std::span<const Detection> detections,
                            const FrameStamp& stamp, TrackIdSource& ids, double iou_assoc,
                            std::size_t max_age) {
    if (!(iou_assoc > 0.0 && iou_assoc < 1.0)) {
        throw Error(Errc::InvalidArgument, "iou_assoc must be in (0, 1)");
    }
    if (max_age < 1) {
        throw Error(Errc::InvalidArgument, "max_age must be at least 1");
    }

    struct Candidate {
        double overlap;
        std::size_t track;
        std::size_t det;
    };
    std::vector<Candidate> candidates;
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        for (std::size_t d = 0; d < detections.size(); ++d) {
            const double overlap = iou(tracks[t].last_bbox, detections[d].bbox);
            if (overlap >= iou_assoc) {
                candidates.push_back({overlap, t, d});
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(b.overlap, a.track, a.det) < std::tie(a.overlap, b.track, b.det);
    });

    std::vector<bool> track_taken(tracks.size(), false);
    std::vector<std::optional<std::size_t>> det_track(detections.size());
    for (const auto& c : candidates) {
        if (track_taken[c.track] || det_track[c.det]) continue;
        track_taken[c.track] = true;
        det_track[c.det] = c.track;
    }

    AssociationResult result;
    result.detection_track.resize(detections.size(), 0);
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        Track& track = tracks[t];
        ++track.frames_alive;
        if (track_taken[t]) {
            track.age_missed = 0;
            track.last_seen_frame = stamp.index;
            track.last_frame_id = stamp.frame_id;
        } else {
            ++track.age_missed;
        }
    }
    for (std::size_t d = 0; d < detections.size(); ++d) {
        if (det_track[d]) {
            Track& track = tracks[*det_track[d]];
            track.last_bbox = detections[d].bbox;
            result.detection_track[d] = track.track_id;
        }
    }
    for (auto& track : tracks) {
        if (track.age_missed > max_age) {
            result.retired.push_back(std::move(track));
        } else {
            result.live.push_back(std::move(track));
        }
    }
    for (std::size_t d = 0; d < detections.size(); ++d) {
        if (det_track[d]) continue;
        Track track;
        track.track_id = ids.next();
        track.last_bbox = detections[d].bbox;
        track.first_frame = track.last_seen_frame = stamp.index;
        track.first_frame_id = track.last_frame_id = stamp.frame_id;
        track.frames_alive = 1;
        result.detection_track[d] = track.track_id;
        result.opened.push_back(track.track_id);
        result.live.push_back(std::move(track));
    }
    return result;
}

std::optional<CanonicalPlate> consensus_plate(std::span<const PlateObservation> history) {
    struct Tally {
        const CanonicalPlate* plate;
        double total;
    };
    std::vector<Tally> tallies;   // first-observation order
    for (const auto& obs : history) {
        auto it = std::find_if(tallies.begin(), tallies.end(),
                               [&](const Tally& t) { return *t.plate == obs.plate; });
        if (it == tallies.end()) {
            tallies.push_back({&obs.plate, obs.text_confidence});
        } else {
            it->total += obs.text_confidence;
        }
    }
    const Tally* best = nullptr;
    for (const auto& t : tallies) {
        if (!best || t.total > best->total) best = &t;
    }
    if (!best) return std::nullopt;
    return *best->plate;
}

}  // namespace sentinel
