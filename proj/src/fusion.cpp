#include "sentinel/fusion.hpp"

#include <algorithm>

#include "sentinel/error.hpp"

namespace sentinel {

std::string_view to_string(AlertKind kind) noexcept {
    switch (kind) {
        case AlertKind::ConfirmedSuspect: return "CONFIRMED_SUSPECT";
        case AlertKind::VehicleSwitch: return "VEHICLE_SWITCH";
        case AlertKind::WatchlistedPlate: return "WATCHLISTED_PLATE";
    }
    return "";
}

std::string_view to_string(Severity severity) noexcept {
    switch (severity) {
        case Severity::Critical: return "critical";
        case Severity::High: return "high";
        case Severity::Medium: return "medium";
    }
    return "";
}

std::string_view to_string(AlertStatus status) noexcept {
    switch (status) {
        case AlertStatus::Open: return "open";
        case AlertStatus::Acknowledged: return "acknowledged";
        case AlertStatus::Dismissed: return "dismissed";
    }
    return "";
}

std::optional<AlertStatus> parse_alert_status(std::string_view text) noexcept {
    if (text == "open") return AlertStatus::Open;
    if (text == "acknowledged") return AlertStatus::Acknowledged;
    if (text == "dismissed") return AlertStatus::Dismissed;
    return std::nullopt;
}

std::optional<Alert> fuse(const VehicleEvent& event, std::span<const GalleryEntry> gallery,
                          std::span<const PlateWatchEntry> plate_watchlist,
                          const ConfusableTable& table) {
    const GalleryEntry* face_entry = nullptr;
    if (event.face_result) {
        const auto it = std::find_if(gallery.begin(), gallery.end(), [&](const GalleryEntry& e) {
            return e.entry_id == event.face_result->entry_id;
        });
        if (it != gallery.end()) face_entry = &*it;
    }
    const bool plate_hit = event.plate_decision.hit();
    const bool linked =
        face_entry && event.consensus_plate &&
        std::any_of(face_entry->linked_plates.begin(), face_entry->linked_plates.end(),
                    [&](const CanonicalPlate& p) {
                        return confusable_distance(p, *event.consensus_plate, table) == 0.0;
                    });

    std::optional<AlertKind> kind;
    if (face_entry && plate_hit && linked) {
        kind = AlertKind::ConfirmedSuspect;
    } else if (face_entry && !linked) {
        kind = AlertKind::VehicleSwitch;
    } else if (!face_entry && plate_hit) {
        kind = AlertKind::WatchlistedPlate;
    }
    if (!kind) {
        return std::nullopt;
    }

    Alert alert;
    alert.kind = *kind;
    alert.severity = severity_for(*kind);
    alert.track_id = event.track_id;
    alert.camera_id = event.camera_id;
    alert.created_at_ms = event.logical_time_ms;
    alert.evidence.plate_decision = event.plate_decision;
    alert.evidence.consensus_plate = event.consensus_plate;
    if (face_entry) {
        alert.evidence.face_entry_id = face_entry->entry_id;
        alert.evidence.person_name = face_entry->person_name;
        alert.evidence.face_distance = event.face_result->distance;
        alert.entity_key = face_entry->entry_id;
    } else {
        alert.entity_key = event.plate_decision.matched_entry_id.value_or("");
    }
    if (const auto& id = event.plate_decision.matched_entry_id) {
        const auto it = std::find_if(plate_watchlist.begin(), plate_watchlist.end(),
                                     [&](const PlateWatchEntry& e) { return e.entry_id == *id; });
        if (it != plate_watchlist.end()) alert.evidence.plate_label = it->label;
    }
    return alert;
}

std::optional<std::int64_t> RecentAlertIndex::last_emitted(AlertKind kind,
                                                           const std::string& entity) const {
    const auto it = last_.find({kind, entity});
    if (it == last_.end()) return std::nullopt;
    return it->second;
}

void RecentAlertIndex::record(const Alert& alert) {
    last_[{alert.kind, alert.entity_key}] = alert.created_at_ms;
}

DebounceDecision debounce(const Alert& candidate, const RecentAlertIndex& recent,
                          std::int64_t cooldown_ms) {
    if (cooldown_ms < 0) {
        throw Error(Errc::InvalidArgument, "cooldown_ms must be non-negative");
    }
    const auto last = recent.last_emitted(candidate.kind, candidate.entity_key);
    if (last && candidate.created_at_ms - *last <= cooldown_ms) {
        return DebounceDecision::Suppress;
    }
    return DebounceDecision::Emit;
}

}  // namespace sentinel
