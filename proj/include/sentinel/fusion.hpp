#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "sentinel/face.hpp"
#include "sentinel/plate.hpp"
#include "sentinel/tracker.hpp"

namespace sentinel {

inline constexpr std::int64_t kDefaultCooldownMs = 30000;

/// A track (or a lone face) summarized for one fusion decision.
struct VehicleEvent {
    std::optional<std::uint64_t> track_id;   // absent for person-only events
    std::string camera_id;
    std::string first_frame;
    std::string last_frame;
    std::int64_t logical_time_ms = 0;
    std::optional<CanonicalPlate> consensus_plate;
    PlateMatchDecision plate_decision;
    std::optional<FaceHit> face_result;
};

enum class AlertKind { ConfirmedSuspect, VehicleSwitch, WatchlistedPlate };
enum class Severity { Critical, High, Medium };
enum class AlertStatus { Open, Acknowledged, Dismissed };

std::string_view to_string(AlertKind kind) noexcept;
std::string_view to_string(Severity severity) noexcept;
std::string_view to_string(AlertStatus status) noexcept;
std::optional<AlertStatus> parse_alert_status(std::string_view text) noexcept;

/// CONFIRMED_SUSPECT -> critical, VEHICLE_SWITCH -> high, WATCHLISTED_PLATE -> medium.
constexpr Severity severity_for(AlertKind kind) noexcept {
    switch (kind) {
        case AlertKind::ConfirmedSuspect: return Severity::Critical;
        case AlertKind::VehicleSwitch: return Severity::High;
        case AlertKind::WatchlistedPlate: return Severity::Medium;
    }
    return Severity::Medium;
}

struct AlertEvidence {
    PlateMatchDecision plate_decision;
    std::optional<CanonicalPlate> consensus_plate;
    std::optional<std::string> face_entry_id;
    std::optional<std::string> person_name;
    std::optional<double> face_distance;
    std::optional<std::string> plate_label;
};

struct Alert {
    std::uint64_t alert_id = 0;   // assigned when the alert is emitted
    AlertKind kind = AlertKind::WatchlistedPlate;
    Severity severity = Severity::Medium;
    std::optional<std::uint64_t> track_id;
    std::string camera_id;
    std::string entity_key;   // face entry id, or plate entry id for WATCHLISTED_PLATE
    AlertEvidence evidence;
    std::int64_t created_at_ms = 0;
    AlertStatus status = AlertStatus::Open;
};

/// Decision table, first hit wins:
///   1. face hit E, plate hit, consensus plate linked to E -> CONFIRMED_SUSPECT
///   2. face hit E, consensus plate absent or not linked   -> VEHICLE_SWITCH
///   3. no face hit, plate hit                             -> WATCHLISTED_PLATE
///   4. otherwise                                          -> nothing
/// A face hit whose entry is no longer in the gallery counts as no face hit.
/// Linkage compares plates up to confusable substitutions.
std::optional<Alert> fuse(const VehicleEvent& event, std::span<const GalleryEntry> gallery,
                          std::span<const PlateWatchEntry> plate_watchlist,
                          const ConfusableTable& table = ConfusableTable());

/// Last emission time per (kind, entity key).
class RecentAlertIndex {
public:
    std::optional<std::int64_t> last_emitted(AlertKind kind, const std::string& entity) const;
    void record(const Alert& alert);

private:
    std::map<std::pair<AlertKind, std::string>, std::int64_t> last_;
};

enum class DebounceDecision { Emit, Suppress };

/// Suppresses a candidate whose (kind, entity) was emitted at most
/// cooldown_ms earlier.
DebounceDecision debounce(const Alert& candidate, const RecentAlertIndex& recent,
                          std::int64_t cooldown_ms = kDefaultCooldownMs);

}  // namespace sentinel
