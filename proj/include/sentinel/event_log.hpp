#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sentinel {

enum class EventKind { FrameProcessed, PlateRead, FaceMatched, TrackOpened, TrackClosed, Alert };

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view text) noexcept;

struct EventLogRecord {
    std::uint64_t seq = 0;
    EventKind kind = EventKind::FrameProcessed;
    nlohmann::json payload;
    std::int64_t logical_time_ms = 0;
};

/// One line of JSON with sorted keys, no trailing newline.
std::string encode(const EventLogRecord& record);

/// Throws Error(SchemaError) for anything that is not a well-formed record.
EventLogRecord decode(std::string_view line);

struct LoadedEventLog {
    std::vector<EventLogRecord> records;
    std::uintmax_t valid_bytes = 0;              // offset just past the last complete record
    std::optional<std::string> partial_tail;     // bytes after the last newline, if any
};

/// Loads every complete record. A trailing line without a newline is
/// reported in partial_tail rather than treated as an error. Complete lines
/// that fail to decode, or seq values that do not strictly increase, throw
/// SchemaError with the line number.
LoadedEventLog load_event_log(const std::filesystem::path& path);

/// Append-only single writer. Each record is written as one complete line.
class EventLogWriter {
public:
    enum class Mode {
        Truncate,   // start a fresh log at seq 1
        Append,     // continue after the last complete record, dropping a partial tail
    };

    EventLogWriter(const std::filesystem::path& path, Mode mode);
    ~EventLogWriter();

    EventLogWriter(const EventLogWriter&) = delete;
    EventLogWriter& operator=(const EventLogWriter&) = delete;

    /// Assigns the next seq and writes the record.
    EventLogRecord append(EventKind kind, nlohmann::json payload, std::int64_t logical_time_ms);
    void flush();

    std::uint64_t last_seq() const noexcept { return last_seq_; }
    /// Set when Append mode had to drop an incomplete trailing line.
    const std::optional<std::string>& recovered_tail() const noexcept { return recovered_tail_; }

private:
    std::FILE* file_ = nullptr;
    std::uint64_t last_seq_ = 0;
    std::optional<std::string> recovered_tail_;
};

}  // namespace sentinel
