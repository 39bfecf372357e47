#include "sentinel/codec.hpp"

#include "sentinel/error.hpp"

namespace sentinel::codec {

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

json optional_plate(const std::optional<CanonicalPlate>& p) {
    return p ? json(p->text()) : json(nullptr);
}

PlateMatchKind parse_match_kind(const std::string& s) {
    if (s == "exact") return PlateMatchKind::Exact;
    if (s == "fuzzy") return PlateMatchKind::Fuzzy;
    if (s == "none") return PlateMatchKind::None;
    throw Error(Errc::SchemaError, "unknown plate match kind '" + s + "'");
}

AlertKind parse_alert_kind(const std::string& s) {
    for (auto k : {AlertKind::ConfirmedSuspect, AlertKind::VehicleSwitch, AlertKind::WatchlistedPlate}) {
        if (to_string(k) == s) return k;
    }
    throw Error(Errc::SchemaError, "unknown alert kind '" + s + "'");
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

}  // namespace

json to_json(const PlateMatchDecision& d) {
    return {{"kind", std::string(to_string(d.kind))},
            {"distance", d.distance},
            {"matched_entry_id", optional_json(d.matched_entry_id)}};
}

json to_json(const PlateParse& parse) {
    if (const auto* s = std::get_if<StructuredPlate>(&parse)) {
        return {{"structured", true},
                {"state_code", s->state_code},
                {"district", s->district},
                {"series", s->series},
                {"number", s->number}};
    }
    return {{"structured", false}, {"text", std::get<UnstructuredPlate>(parse).text}};
}

json to_json(const Alert& a) {
    const AlertEvidence& e = a.evidence;
    return {{"alert_id", a.alert_id},
            {"kind", std::string(to_string(a.kind))},
            {"severity", std::string(to_string(a.severity))},
            {"track_id", optional_json(a.track_id)},
            {"camera_id", a.camera_id},
            {"entity_key", a.entity_key},
            {"created_at_ms", a.created_at_ms},
            {"status", std::string(to_string(a.status))},
            {"evidence",
             {{"plate_decision", to_json(e.plate_decision)},
              {"consensus_plate", optional_plate(e.consensus_plate)},
              {"face_entry_id", optional_json(e.face_entry_id)},
              {"person_name", optional_json(e.person_name)},
              {"face_distance", optional_json(e.face_distance)},
              {"plate_label", optional_json(e.plate_label)}}}};
}

Alert alert_from_json(const json& j) {
    try {
        Alert a;
        a.alert_id = j.at("alert_id").get<std::uint64_t>();
        a.kind = parse_alert_kind(j.at("kind").get<std::string>());
        a.severity = severity_for(a.kind);
        a.track_id = get_optional<std::uint64_t>(j, "track_id");
        a.camera_id = j.at("camera_id").get<std::string>();
        a.entity_key = j.at("entity_key").get<std::string>();
        a.created_at_ms = j.at("created_at_ms").get<std::int64_t>();
        const auto status = parse_alert_status(j.at("status").get<std::string>());
        if (!status) throw Error(Errc::SchemaError, "unknown alert status");
        a.status = *status;
        const json& e = j.at("evidence");
        const json& d = e.at("plate_decision");
        a.evidence.plate_decision.kind = parse_match_kind(d.at("kind").get<std::string>());
        a.evidence.plate_decision.distance = d.at("distance").get<double>();
        a.evidence.plate_decision.matched_entry_id = get_optional<std::string>(d, "matched_entry_id");
        if (auto p = get_optional<std::string>(e, "consensus_plate")) {
            a.evidence.consensus_plate = CanonicalPlate::from_canonical(*p);
        }
        a.evidence.face_entry_id = get_optional<std::string>(e, "face_entry_id");
        a.evidence.person_name = get_optional<std::string>(e, "person_name");
        a.evidence.face_distance = get_optional<double>(e, "face_distance");
        a.evidence.plate_label = get_optional<std::string>(e, "plate_label");
        return a;
    } catch (const json::exception& ex) {
        throw Error(Errc::SchemaError, std::string("malformed alert: ") + ex.what());
    }
}

}  // namespace sentinel::codec
