#include "sentinel/event_log.hpp"

#include <array>
#include <fstream>
#include <iterator>

#include "sentinel/error.hpp"

namespace sentinel {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 6> kKinds{{
    {EventKind::FrameProcessed, "frame_processed"},
    {EventKind::PlateRead, "plate_read"},
    {EventKind::FaceMatched, "face_matched"},
    {EventKind::TrackOpened, "track_opened"},
    {EventKind::TrackClosed, "track_closed"},
    {EventKind::Alert, "alert"},
}};

}  // namespace

std::string_view to_string(EventKind kind) noexcept {
    for (const auto& [k, name] : kKinds) {
        if (k == kind) return name;
    }
    return "";
}

std::optional<EventKind> parse_event_kind(std::string_view text) noexcept {
    for (const auto& [k, name] : kKinds) {
        if (name == text) return k;
    }
    return std::nullopt;
}

std::string encode(const EventLogRecord& record) {
    nlohmann::json j{{"seq", record.seq},
                     {"kind", std::string(to_string(record.kind))},
                     {"logical_time_ms", record.logical_time_ms},
                     {"payload", record.payload}};
    return j.dump();
}

EventLogRecord decode(std::string_view line) {
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(Errc::SchemaError, "event record is not a JSON object");
    }
    try {
        EventLogRecord r;
        r.seq = j.at("seq").get<std::uint64_t>();
        const auto kind = parse_event_kind(j.at("kind").get<std::string>());
        if (!kind) throw Error(Errc::SchemaError, "unknown event kind");
        r.kind = *kind;
        r.logical_time_ms = j.at("logical_time_ms").get<std::int64_t>();
        r.payload = j.at("payload");
        if (j.size() != 4) throw Error(Errc::SchemaError, "unexpected fields in event record");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::SchemaError, std::string("malformed event record: ") + e.what());
    }
}

LoadedEventLog load_event_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::IoError, "cannot open event log " + path.string());
    }
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    LoadedEventLog out;
    std::size_t start = 0;
    std::size_t line = 0;
    while (start < data.size()) {
        const auto nl = data.find('\n', start);
        if (nl == std::string::npos) {
            out.partial_tail = data.substr(start);
            break;
        }
        ++line;
        const std::string_view text(data.data() + start, nl - start);
        EventLogRecord r;
        try {
            r = decode(text);
        } catch (const Error& e) {
            throw SchemaError(Errc::SchemaError, line, e.what());
        }
        if (!out.records.empty() && r.seq <= out.records.back().seq) {
            throw SchemaError(Errc::SchemaError, line, "seq does not increase");
        }
        out.records.push_back(std::move(r));
        start = nl + 1;
        out.valid_bytes = start;
    }
    return out;
}

EventLogWriter::EventLogWriter(const std::filesystem::path& path, Mode mode) {
    if (mode == Mode::Append && std::filesystem::exists(path)) {
        const LoadedEventLog existing = load_event_log(path);
        if (existing.partial_tail) {
            std::filesystem::resize_file(path, existing.valid_bytes);
            recovered_tail_ = existing.partial_tail;
        }
        if (!existing.records.empty()) last_seq_ = existing.records.back().seq;
    }
    file_ = std::fopen(path.c_str(), mode == Mode::Append ? "ab" : "wb");
    if (!file_) {
        throw Error(Errc::IoError, "cannot open event log " + path.string() + " for writing");
    }
}

EventLogWriter::~EventLogWriter() {
    if (file_) std::fclose(file_);
}

EventLogRecord EventLogWriter::append(EventKind kind, nlohmann::json payload,
                                      std::int64_t logical_time_ms) {
    EventLogRecord r{last_seq_ + 1, kind, std::move(payload), logical_time_ms};
    std::string line = encode(r);
    line.push_back('\n');
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size()) {
        throw Error(Errc::IoError, "event log write failed");
    }
    last_seq_ = r.seq;
    return r;
}

void EventLogWriter::flush() {
    if (std::fflush(file_) != 0) {
        throw Error(Errc::IoError, "event log flush failed");
    }
}

}  // namespace sentinel
