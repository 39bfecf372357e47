#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sentinel/config.hpp"
#include "sentinel/event_log.hpp"
#include "sentinel/fusion.hpp"
#include "sentinel/pipeline.hpp"
#include "sentinel/watchlist.hpp"

namespace sentinel {

/// In-memory alert index fed by the persistence stage and mutated by
/// operators. Status moves only from open to acknowledged or dismissed.
class AlertStore {
public:
    struct Entry {
        Alert alert;
        std::uint64_t seq = 0;   // event log seq of the alert record
    };

    void add(const Alert& alert, std::uint64_t seq);

    /// Alerts in emission order, optionally filtered by status and by
    /// event seq strictly greater than since_seq.
    std::vector<Entry> list(std::optional<AlertStatus> status, std::uint64_t since_seq) const;

    /// Errors: NotFound for an unknown id, Conflict unless the alert is open.
    Entry transition(std::uint64_t alert_id, AlertStatus to);

    std::size_t open_count() const;

private:
    mutable std::mutex mutex_;
    std::vector<Entry> entries_;
    std::map<std::uint64_t, std::size_t> by_id_;
};

/// Encoded event log lines kept for replay, with blocking waits for new ones.
class EventHub {
public:
    void publish(const EventLogRecord& record);

    /// Records with seq > after_seq, waiting up to `timeout` for at least one.
    /// Returns early with nothing once closed.
    std::vector<std::pair<std::uint64_t, std::string>> wait_after(
        std::uint64_t after_seq, std::chrono::milliseconds timeout);

    void close();
    bool closed() const;
    std::uint64_t last_seq() const;

private:
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::vector<std::pair<std::uint64_t, std::string>> lines_;   // ascending seq
    bool closed_ = false;
};

/// Pipeline plus HTTP API. The pipeline's persistence stage feeds the alert
/// store and the event hub; handlers only read those and mutate the
/// watchlist store and alert statuses.
///
///   GET    /api/health
///   GET    /api/alerts?status=&since_seq=
///   POST   /api/alerts/{id}/ack | /api/alerts/{id}/dismiss
///   GET    /api/watchlist/plates | POST /api/watchlist/plates
///   DELETE /api/watchlist/plates/{id}
///   GET    /api/watchlist/faces  | POST /api/watchlist/faces
///   DELETE /api/watchlist/faces/{id}
///   GET    /api/events/stream    (SSE; resume with Last-Event-ID or ?last_event_id=)
class Service {
public:
    explicit Service(PipelineConfig config);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the listener; port 0 picks a free port. Returns the bound port.
    /// Throws Error(BindFailure).
    int bind(const std::string& host, int port);

    /// Serves on the calling thread until stop().
    void listen();
    /// Serves on a background thread.
    void start();
    /// Stops serving, ends event streams, drains the pipeline. Idempotent.
    void stop();

    /// Feeds config.manifest (and, with follow_manifest, lines appended to
    /// it later) into the pipeline from a background thread.
    void start_manifest_feed();

    /// Thread-safe frame submission.
    void submit(FrameRef frame);

    std::size_t frames_processed() const;
    AlertStore& alerts();
    WatchlistStore& watchlist();
    EventHub& events();

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

/// Runs `serve`: binds config.api, feeds the manifest, blocks until SIGINT
/// or SIGTERM.
void serve_api(const PipelineConfig& config);

}  // namespace sentinel
