#include "sentinel/pipeline.hpp"

#include <algorithm>
#include <map>

#include "sentinel/bounded_queue.hpp"
#include "sentinel/codec.hpp"
#include "sentinel/error.hpp"
#include "sentinel/jsonl.hpp"
#include "sentinel/manifest.hpp"
#include "sentinel/tracker.hpp"

#ifdef SENTINEL_HAVE_OPENCV
#include "sentinel/neural_backend.hpp"
#endif

namespace sentinel {

using nlohmann::json;

std::shared_ptr<const DetectorBackend> make_backend(const PipelineConfig& config) {
    std::shared_ptr<const DetectorBackend> inner;
    if (config.backend.kind == "stub") {
        try {
            inner = std::make_shared<StubBackend>(
                StubBackend::load(config.backend.fixture, config.embedding_dim));
        } catch (const SchemaError&) {
            throw;
        } catch (const Error& e) {
            throw Error(Errc::BackendUnavailable, e.what());
        }
    } else {
#ifdef SENTINEL_HAVE_OPENCV
        inner = make_neural_backend(config.backend.neural, config.embedding_dim);
#else
        throw Error(Errc::BackendUnavailable,
                    "this build has no neural backend (configure with OpenCV to enable it)");
#endif
    }
    return std::make_shared<ValidatingBackend>(std::move(inner), config.embedding_dim);
}

namespace {

struct FrameTask {
    std::uint64_t seq = 0;
    FrameRef frame;
};

struct PlateItem {
    PlateReading reading;
    std::optional<CanonicalPlate> plate;
    std::optional<PlateParse> parse;
    std::string reject_code;
};

struct PlateFrame {
    std::uint64_t seq = 0;
    FrameRef frame;
    std::vector<PlateItem> items;
};

struct FaceItem {
    FaceObservation observation;
    std::optional<FaceHit> hit;
    std::string person_name;
    std::size_t matches = 0;
};

struct FaceFrame {
    std::uint64_t seq = 0;
    std::vector<FaceItem> items;
};

struct PendingEvent {
    EventKind kind;
    json payload;
    std::int64_t logical_time_ms = 0;
    std::optional<Alert> alert;
};

using EventBatch = std::vector<PendingEvent>;

json optional_id(const std::optional<std::uint64_t>& id) {
    return id ? json(*id) : json(nullptr);
}

/// Tracker + fusion state for the whole run. Sole owner of track state.
class FusionEngine {
public:
    FusionEngine(const PipelineConfig& config, std::shared_ptr<WatchlistStore> watchlist)
        : config_(config), table_(config.confusable_table()), watchlist_(std::move(watchlist)) {}

    EventBatch process(const PlateFrame& plates, const FaceFrame& faces) {
        EventBatch out;
        const FrameRef& frame = plates.frame;
        const std::int64_t now = frame.timestamp_ms;
        Camera& cam = cameras_[frame.camera_id];
        cam.last_time_ms = now;
        const FrameStamp stamp{cam.frames_seen++, frame.frame_id};

        std::vector<Detection> dets;
        dets.reserve(plates.items.size());
        for (const auto& item : plates.items) dets.push_back(item.reading.detection);

        AssociationResult assoc = associate(std::move(cam.tracks), dets, stamp, ids_,
                                            config_.iou_assoc, config_.max_age);
        cam.tracks = std::move(assoc.live);

        for (std::uint64_t id : assoc.opened) {
            out.push_back({EventKind::TrackOpened,
                           {{"track_id", id}, {"camera_id", frame.camera_id},
                            {"frame_id", frame.frame_id}},
                           now,
                           std::nullopt});
        }

        for (std::size_t i = 0; i < plates.items.size(); ++i) {
            const PlateItem& item = plates.items[i];
            const std::uint64_t track_id = assoc.detection_track[i];
            json payload{{"frame_id", frame.frame_id},
                         {"camera_id", frame.camera_id},
                         {"track_id", track_id},
                         {"bbox", jsonl::bbox_to_json(item.reading.detection.bbox)},
                         {"confidence", item.reading.detection.confidence},
                         {"raw_text", item.reading.raw_text},
                         {"text_confidence", item.reading.text_confidence}};
            if (item.plate) {
                payload["plate"] = item.plate->text();
                payload["parse"] = codec::to_json(*item.parse);
                payload["reject"] = nullptr;
                find_track(cam, track_id)
                    .plate_history.push_back({*item.plate, item.reading.text_confidence});
            } else {
                payload["plate"] = nullptr;
                payload["parse"] = nullptr;
                payload["reject"] = item.reject_code;
            }
            out.push_back({EventKind::PlateRead, std::move(payload), now, std::nullopt});
        }

        const auto snapshot = watchlist_->snapshot();
        const auto plate_list = effective_plate_watchlist(*snapshot);

        for (const auto& item : faces.items) {
            if (!item.hit) continue;
            Track* bound = bind_face(cam, stamp.index, item.observation.detection.bbox);
            std::optional<std::uint64_t> track_id;
            if (bound) {
                track_id = bound->track_id;
                if (!bound->face_best || item.hit->distance < bound->face_best->distance) {
                    bound->face_best = item.hit;
                }
            }
            out.push_back({EventKind::FaceMatched,
                           {{"frame_id", frame.frame_id},
                            {"camera_id", frame.camera_id},
                            {"entry_id", item.hit->entry_id},
                            {"person_name", item.person_name},
                            {"distance", item.hit->distance},
                            {"matches", item.matches},
                            {"bbox", jsonl::bbox_to_json(item.observation.detection.bbox)},
                            {"track_id", optional_id(track_id)}},
                           now,
                           std::nullopt});
            if (!bound) {
                VehicleEvent ev;
                ev.camera_id = frame.camera_id;
                ev.first_frame = ev.last_frame = frame.frame_id;
                ev.logical_time_ms = now;
                ev.face_result = item.hit;
                decide(ev, *snapshot, plate_list, out);
            }
        }

        for (const auto& track : cam.tracks) {
            if (track.frames_alive % config_.checkpoint_every == 0) {
                decide(make_event(track, frame.camera_id, now, plate_list), *snapshot, plate_list,
                       out);
            }
        }
        for (const auto& track : assoc.retired) {
            close_track(track, frame.camera_id, now, *snapshot, plate_list, out);
        }

        out.push_back({EventKind::FrameProcessed,
                       {{"frame_id", frame.frame_id},
                        {"camera_id", frame.camera_id},
                        {"timestamp_ms", now},
                        {"image_path", frame.image_path},
                        {"plates", plates.items.size()},
                        {"faces", faces.items.size()},
                        {"live_tracks", cam.tracks.size()}},
                       now,
                       std::nullopt});
        return out;
    }

    /// Closes every live track, cameras in id order.
    EventBatch flush() {
        EventBatch out;
        const auto snapshot = watchlist_->snapshot();
        const auto plate_list = effective_plate_watchlist(*snapshot);
        for (auto& [camera_id, cam] : cameras_) {
            for (const auto& track : cam.tracks) {
                close_track(track, camera_id, cam.last_time_ms, *snapshot, plate_list, out);
            }
            cam.tracks.clear();
        }
        return out;
    }

private:
    struct Camera {
        std::vector<Track> tracks;
        std::uint64_t frames_seen = 0;
        std::int64_t last_time_ms = 0;
    };

    static Track& find_track(Camera& cam, std::uint64_t id) {
        const auto it = std::find_if(cam.tracks.begin(), cam.tracks.end(),
                                     [id](const Track& t) { return t.track_id == id; });
        if (it == cam.tracks.end()) {
            throw Error(Errc::InvalidArgument, "detection refers to an unknown track");
        }
        return *it;
    }

    // The face binds to the lowest-id track seen this frame whose box
    // contains the face center.
    static Track* bind_face(Camera& cam, std::uint64_t frame_index, const BBox& face) {
        Track* best = nullptr;
        for (auto& t : cam.tracks) {
            if (t.last_seen_frame != frame_index) continue;
            if (!t.last_bbox.contains(face.center_x(), face.center_y())) continue;
            if (!best || t.track_id < best->track_id) best = &t;
        }
        return best;
    }

    VehicleEvent make_event(const Track& track, const std::string& camera_id, std::int64_t now,
                            const std::vector<PlateWatchEntry>& plate_list) const {
        VehicleEvent ev;
        ev.track_id = track.track_id;
        ev.camera_id = camera_id;
        ev.first_frame = track.first_frame_id;
        ev.last_frame = track.last_frame_id;
        ev.logical_time_ms = now;
        ev.consensus_plate = consensus_plate(track.plate_history);
        if (ev.consensus_plate) {
            ev.plate_decision = plate_match(*ev.consensus_plate, plate_list, config_.tau_plate, table_);
        }
        ev.face_result = track.face_best;
        return ev;
    }

    void close_track(const Track& track, const std::string& camera_id, std::int64_t now,
                     const Watchlist& snapshot, const std::vector<PlateWatchEntry>& plate_list,
                     EventBatch& out) {
        const VehicleEvent ev = make_event(track, camera_id, now, plate_list);
        out.push_back({EventKind::TrackClosed,
                       {{"track_id", track.track_id},
                        {"camera_id", camera_id},
                        {"first_frame", track.first_frame_id},
                        {"last_frame", track.last_frame_id},
                        {"plate_observations", track.plate_history.size()},
                        {"consensus_plate",
                         ev.consensus_plate ? json(ev.consensus_plate->text()) : json(nullptr)},
                        {"plate_decision", codec::to_json(ev.plate_decision)},
                        {"face_entry_id",
                         track.face_best ? json(track.face_best->entry_id) : json(nullptr)}},
                       now,
                       std::nullopt});
        decide(ev, snapshot, plate_list, out);
    }

    void decide(const VehicleEvent& ev, const Watchlist& snapshot,
                const std::vector<PlateWatchEntry>& plate_list, EventBatch& out) {
        auto alert = fuse(ev, snapshot.faces, plate_list, table_);
        if (!alert) return;
        if (debounce(*alert, recent_, config_.cooldown_ms) == DebounceDecision::Suppress) return;
        alert->alert_id = ++last_alert_id_;
        recent_.record(*alert);
        out.push_back({EventKind::Alert, codec::to_json(*alert), alert->created_at_ms, *alert});
    }

    const PipelineConfig& config_;
    ConfusableTable table_;
    std::shared_ptr<WatchlistStore> watchlist_;
    std::map<std::string, Camera> cameras_;
    TrackIdSource ids_;
    RecentAlertIndex recent_;
    std::uint64_t last_alert_id_ = 0;
};

}  // namespace

struct Pipeline::Impl {
    Impl(PipelineConfig cfg, std::shared_ptr<const DetectorBackend> be,
         std::shared_ptr<WatchlistStore> wl, EventLogWriter::Mode mode, EventObserver obs)
        : config(std::move(cfg)),
          table(config.confusable_table()),
          backend(std::move(be)),
          watchlist(std::move(wl)),
          writer(config.event_log, mode),
          observer(std::move(obs)),
          plate_in(config.queue_capacity),
          face_in(config.queue_capacity),
          plate_out(config.queue_capacity),
          face_out(config.queue_capacity),
          persist_in(config.queue_capacity),
          engine(config, watchlist) {}

    void fail(const char* stage, const std::exception& e) {
        {
            std::lock_guard lock(error_mutex);
            if (!error) {
                const auto* err = dynamic_cast<const Error*>(&e);
                error = Error(err ? err->code() : Errc::IoError,
                              std::string(stage) + " stage: " + e.what());
            }
        }
        plate_in.abort();
        face_in.abort();
        plate_out.abort();
        face_out.abort();
        persist_in.abort();
    }

    std::optional<Error> first_error() {
        std::lock_guard lock(error_mutex);
        return error;
    }

    void run_plate_branch() {
        try {
            while (auto task = plate_in.pop()) {
                PlateFrame out{task->seq, task->frame, {}};
                for (auto& reading : backend->detect_plates(task->frame)) {
                    PlateItem item{std::move(reading), std::nullopt, std::nullopt, {}};
                    try {
                        item.plate = canonicalize(item.reading.raw_text);
                        item.parse = parse_plate(*item.plate);
                    } catch (const Error& e) {
                        item.reject_code = std::string(to_string(e.code()));
                    }
                    out.items.push_back(std::move(item));
                }
                if (!plate_out.push(std::move(out))) return;
            }
            plate_out.close();
        } catch (const std::exception& e) {
            fail("plate", e);
        }
    }

    void run_face_branch() {
        try {
            while (auto task = face_in.pop()) {
                FaceFrame out{task->seq, {}};
                const auto snapshot = watchlist->snapshot();
                for (auto& obs : backend->detect_faces(task->frame)) {
                    FaceItem item{std::move(obs), std::nullopt, {}, 0};
                    const FaceMatchResult m = match_gallery(item.observation.embedding,
                                                            snapshot->faces, config.tau_face,
                                                            config.face_metric);
                    item.matches = static_cast<std::size_t>(
                        std::count(m.booleans.begin(), m.booleans.end(), true));
                    if (m.best_index) {
                        const GalleryEntry& e = snapshot->faces[*m.best_index];
                        item.hit = FaceHit{e.entry_id, m.best_distance};
                        item.person_name = e.person_name;
                    }
                    out.items.push_back(std::move(item));
                }
                if (!face_out.push(std::move(out))) return;
            }
            face_out.close();
        } catch (const std::exception& e) {
            fail("face", e);
        }
    }

    void run_fusion() {
        try {
            while (auto plates = plate_out.pop()) {
                auto faces = face_out.pop();
                if (!faces) return;
                if (faces->seq != plates->seq) {
                    throw Error(Errc::InvalidArgument, "branch outputs out of step");
                }
                if (!persist_in.push(engine.process(*plates, *faces))) return;
            }
            if (first_error()) return;
            persist_in.push(engine.flush());
            persist_in.close();
        } catch (const std::exception& e) {
            fail("fusion", e);
        }
    }

    void run_persistence(std::atomic<std::size_t>& frames, std::atomic<std::size_t>& alerts) {
        try {
            while (auto batch = persist_in.pop()) {
                for (auto& ev : *batch) {
                    const EventLogRecord rec =
                        writer.append(ev.kind, std::move(ev.payload), ev.logical_time_ms);
                    if (ev.kind == EventKind::FrameProcessed) ++frames;
                    if (ev.kind == EventKind::Alert) ++alerts;
                    if (observer) observer(rec, ev.alert ? &*ev.alert : nullptr);
                }
                writer.flush();
            }
            writer.flush();
        } catch (const std::exception& e) {
            fail("persistence", e);
        }
    }

    PipelineConfig config;
    ConfusableTable table;
    std::shared_ptr<const DetectorBackend> backend;
    std::shared_ptr<WatchlistStore> watchlist;
    EventLogWriter writer;
    EventObserver observer;

    BoundedQueue<FrameTask> plate_in;
    BoundedQueue<FrameTask> face_in;
    BoundedQueue<PlateFrame> plate_out;
    BoundedQueue<FaceFrame> face_out;
    BoundedQueue<EventBatch> persist_in;

    FusionEngine engine;
    std::uint64_t next_seq = 0;
    bool finished = false;

    std::mutex error_mutex;
    std::optional<Error> error;
    std::vector<std::thread> threads;
};

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<const DetectorBackend> backend,
                   std::shared_ptr<WatchlistStore> watchlist, EventLogWriter::Mode log_mode,
                   EventObserver observer) {
    validate(config);
    impl_ = std::make_unique<Impl>(std::move(config), std::move(backend), std::move(watchlist),
                                   log_mode, std::move(observer));
    Impl& impl = *impl_;
    impl.threads.emplace_back([&impl] { impl.run_plate_branch(); });
    impl.threads.emplace_back([&impl] { impl.run_face_branch(); });
    impl.threads.emplace_back([&impl] { impl.run_fusion(); });
    impl.threads.emplace_back(
        [this, &impl] { impl.run_persistence(frames_processed_, alerts_emitted_); });
}

Pipeline::~Pipeline() {
    if (impl_ && !impl_->finished) {
        try {
            finish();
        } catch (...) {
        }
    }
}

void Pipeline::submit(FrameRef frame) {
    Impl& impl = *impl_;
    if (impl.finished) {
        throw Error(Errc::InvalidArgument, "pipeline already finished");
    }
    FrameTask task{impl.next_seq++, std::move(frame)};
    const bool ok = impl.plate_in.push(task) && impl.face_in.push(std::move(task));
    if (!ok) {
        if (auto err = impl.first_error()) throw *err;
        throw Error(Errc::InvalidArgument, "pipeline input is closed");
    }
}

RunSummary Pipeline::finish() {
    Impl& impl = *impl_;
    if (!impl.finished) {
        impl.finished = true;
        impl.plate_in.close();
        impl.face_in.close();
        for (auto& t : impl.threads) t.join();
        impl.threads.clear();
    }
    if (auto err = impl.first_error()) throw *err;
    return {impl.config.event_log, alerts_emitted_.load(), frames_processed_.load()};
}

RunSummary run_pipeline(const PipelineConfig& config) {
    if (config.manifest.empty() || config.event_log.empty()) {
        throw Error(Errc::ConfigError, "config: run needs both manifest and event_log");
    }
    const std::vector<FrameRef> frames = ingest(config.manifest);
    auto backend = make_backend(config);
    auto watchlist = std::make_shared<WatchlistStore>(config.watchlist, config.embedding_dim);
    Pipeline pipeline(config, std::move(backend), std::move(watchlist));
    for (const auto& f : frames) {
        pipeline.submit(f);
    }
    return pipeline.finish();
}

}  // namespace sentinel
