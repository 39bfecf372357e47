#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sentinel/backend.hpp"
#include "sentinel/config.hpp"
#include "sentinel/event_log.hpp"
#include "sentinel/fusion.hpp"
#include "sentinel/watchlist.hpp"

namespace sentinel {

struct RunSummary {
    std::filesystem::path event_log_path;
    std::size_t alert_count = 0;
    std::size_t frames_processed = 0;
};

/// Called by the persistence stage after each record is written. `alert` is
/// set for alert records.
using EventObserver = std::function<void(const EventLogRecord& record, const Alert* alert)>;

/// Stub or neural backend per config, wrapped in boundary validation.
/// Throws Error(BackendUnavailable) when the configured backend cannot load.
std::shared_ptr<const DetectorBackend> make_backend(const PipelineConfig& config);

/// Staged pipeline:
///
///   submit -> [plate branch] --+
///          -> [face branch]  --+-> [tracker + fusion] -> [persistence]
///
/// Stages run on their own threads and are joined by bounded FIFO queues of
/// config.queue_capacity. Every stage handles frames strictly in submission
/// order, so the event log depends only on the submitted frames, the backend
/// and the watchlist contents, never on scheduling or queue capacity.
class Pipeline {
public:
    Pipeline(PipelineConfig config, std::shared_ptr<const DetectorBackend> backend,
             std::shared_ptr<WatchlistStore> watchlist,
             EventLogWriter::Mode log_mode = EventLogWriter::Mode::Truncate,
             EventObserver observer = {});
    ~Pipeline();

    Pipeline(const Pipeline&) = delete;
    Pipeline& operator=(const Pipeline&) = delete;

    /// Blocks while the first stage is full. Throws the failing stage's
    /// error once any stage has failed.
    void submit(FrameRef frame);

    /// Ends input, closes every live track, drains all stages and joins
    /// them. Rethrows the first stage failure, prefixed with the stage name.
    RunSummary finish();

    std::size_t frames_processed() const noexcept { return frames_processed_.load(); }
    std::size_t alerts_emitted() const noexcept { return alerts_emitted_.load(); }

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
    std::atomic<std::size_t> frames_processed_{0};
    std::atomic<std::size_t> alerts_emitted_{0};
};

/// Ingests config.manifest, runs every frame through a Pipeline writing
/// config.event_log from scratch, and returns the totals.
RunSummary run_pipeline(const PipelineConfig& config);

}  // namespace sentinel
