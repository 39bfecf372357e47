#include "sentinel/api.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <csignal>
#include <iostream>
#include <thread>

#include <httplib.h>
#include <pthread.h>

#include "sentinel/codec.hpp"
#include "sentinel/error.hpp"
#include "sentinel/manifest.hpp"

namespace sentinel {

using nlohmann::json;

void AlertStore::add(const Alert& alert, std::uint64_t seq) {
    std::lock_guard lock(mutex_);
    by_id_[alert.alert_id] = entries_.size();
    entries_.push_back({alert, seq});
}

std::vector<AlertStore::Entry> AlertStore::list(std::optional<AlertStatus> status,
                                                std::uint64_t since_seq) const {
    std::lock_guard lock(mutex_);
    std::vector<Entry> out;
    for (const auto& e : entries_) {
        if (e.seq <= since_seq) continue;
        if (status && e.alert.status != *status) continue;
        out.push_back(e);
    }
    return out;
}

AlertStore::Entry AlertStore::transition(std::uint64_t alert_id, AlertStatus to) {
    std::lock_guard lock(mutex_);
    const auto it = by_id_.find(alert_id);
    if (it == by_id_.end()) {
        throw Error(Errc::NotFound, "no alert with id " + std::to_string(alert_id));
    }
    Entry& e = entries_[it->second];
    if (e.alert.status != AlertStatus::Open || to == AlertStatus::Open) {
        throw Error(Errc::Conflict, "alert " + std::to_string(alert_id) + " is " +
                                        std::string(to_string(e.alert.status)) + ", cannot become " +
                                        std::string(to_string(to)));
    }
    e.alert.status = to;
    return e;
}

std::size_t AlertStore::open_count() const {
    std::lock_guard lock(mutex_);
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [](const Entry& e) {
        return e.alert.status == AlertStatus::Open;
    }));
}

void EventHub::publish(const EventLogRecord& record) {
    {
        std::lock_guard lock(mutex_);
        lines_.emplace_back(record.seq, encode(record));
    }
    cv_.notify_all();
}

std::vector<std::pair<std::uint64_t, std::string>> EventHub::wait_after(
    std::uint64_t after_seq, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    auto newer = [&] { return !lines_.empty() && lines_.back().first > after_seq; };
    cv_.wait_for(lock, timeout, [&] { return closed_ || newer(); });
    std::vector<std::pair<std::uint64_t, std::string>> out;
    if (closed_) return out;
    auto it = std::upper_bound(lines_.begin(), lines_.end(), after_seq,
                               [](std::uint64_t s, const auto& line) { return s < line.first; });
    out.assign(it, lines_.end());
    return out;
}

void EventHub::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool EventHub::closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
}

std::uint64_t EventHub::last_seq() const {
    std::lock_guard lock(mutex_);
    return lines_.empty() ? 0 : lines_.back().first;
}

namespace {

int http_status(Errc code) {
    switch (code) {
        case Errc::NotFound: return 404;
        case Errc::Conflict: return 409;
        case Errc::IoError:
        case Errc::BackendUnavailable: return 500;
        default: return 400;
    }
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
    send_json(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

void send_error(httplib::Response& res, const Error& e) {
    send_error(res, http_status(e.code()), to_string(e.code()), e.what());
}

json parse_body(const httplib::Request& req) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) {
        throw Error(Errc::SchemaError, "request body is not valid JSON");
    }
    if (!body.is_object()) {
        throw Error(Errc::SchemaError, "request body must be a JSON object");
    }
    return body;
}

std::optional<std::uint64_t> parse_u64(std::string_view text) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

json alert_entry_json(const AlertStore::Entry& e) {
    json j = codec::to_json(e.alert);
    j["seq"] = e.seq;
    return j;
}

std::int64_t wall_clock_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

struct Service::Impl {
    explicit Impl(PipelineConfig cfg) : config(std::move(cfg)) {
        if (config.event_log.empty()) {
            throw Error(Errc::ConfigError, "config: serve needs event_log");
        }
        watchlist = std::make_shared<WatchlistStore>(config.watchlist, config.embedding_dim);
        pipeline = std::make_unique<Pipeline>(
            config, make_backend(config), watchlist, EventLogWriter::Mode::Truncate,
            [this](const EventLogRecord& rec, const Alert* alert) {
                if (alert) alerts.add(*alert, rec.seq);
                hub.publish(rec);
            });
        routes();
    }

    void routes();
    void handle_stream(const httplib::Request& req, httplib::Response& res);

    template <typename F>
    void guarded(httplib::Response& res, F&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            send_error(res, e);
        } catch (const std::exception& e) {
            send_error(res, 500, "internal", e.what());
        }
    }

    PipelineConfig config;
    std::shared_ptr<WatchlistStore> watchlist;
    AlertStore alerts;
    EventHub hub;
    std::unique_ptr<Pipeline> pipeline;
    std::mutex submit_mutex;

    httplib::Server server;
    std::thread server_thread;
    std::thread feed_thread;
    std::atomic<bool> stopping{false};
    std::once_flag stop_once;
};

void Service::Impl::routes() {
    server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200,
                  {{"status", "ok"},
                   {"frames_processed", pipeline->frames_processed()},
                   {"open_alerts", alerts.open_count()},
                   {"server_time_ms", wall_clock_ms()}});
    });

    server.Get("/api/alerts", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            std::optional<AlertStatus> status;
            if (req.has_param("status") && !req.get_param_value("status").empty()) {
                status = parse_alert_status(req.get_param_value("status"));
                if (!status) throw Error(Errc::InvalidArgument, "unknown status filter");
            }
            std::uint64_t since = 0;
            if (req.has_param("since_seq") && !req.get_param_value("since_seq").empty()) {
                const auto v = parse_u64(req.get_param_value("since_seq"));
                if (!v) throw Error(Errc::InvalidArgument, "since_seq must be a non-negative integer");
                since = *v;
            }
            json out = json::array();
            for (const auto& e : alerts.list(status, since)) out.push_back(alert_entry_json(e));
            send_json(res, 200, out);
        });
    });

    auto transition = [this](AlertStatus to) {
        return [this, to](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto id = parse_u64(req.matches[1].str());
                if (!id) throw Error(Errc::NotFound, "no such alert");
                send_json(res, 200, alert_entry_json(alerts.transition(*id, to)));
            });
        };
    };
    server.Post(R"(/api/alerts/([^/]+)/ack)", transition(AlertStatus::Acknowledged));
    server.Post(R"(/api/alerts/([^/]+)/dismiss)", transition(AlertStatus::Dismissed));

    server.Get("/api/watchlist/plates", [this](const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        for (const auto& p : watchlist->snapshot()->plates) out.push_back(to_json(p));
        send_json(res, 200, out);
    });
    server.Post("/api/watchlist/plates", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = parse_body(req);
            if (!body.contains("plate") || !body["plate"].is_string()) {
                throw Error(Errc::SchemaError, "'plate' must be a string");
            }
            if (body.contains("label") && !body["label"].is_string()) {
                throw Error(Errc::SchemaError, "'label' must be a string");
            }
            for (const auto& item : body.items()) {
                if (item.key() != "plate" && item.key() != "label") {
                    throw Error(Errc::SchemaError, "unknown field '" + item.key() + "'");
                }
            }
            const auto entry = watchlist->add_plate(body["plate"].get<std::string>(),
                                                    body.value("label", std::string{}));
            send_json(res, 201, to_json(entry));
        });
    });
    server.Delete(R"(/api/watchlist/plates/([^/]+))",
                  [this](const httplib::Request& req, httplib::Response& res) {
                      guarded(res, [&] {
                          if (!watchlist->remove_plate(req.matches[1].str())) {
                              throw Error(Errc::NotFound, "no plate entry " + req.matches[1].str());
                          }
                          res.status = 204;
                      });
                  });

    server.Get("/api/watchlist/faces", [this](const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        for (const auto& f : watchlist->snapshot()->faces) out.push_back(to_json(f));
        send_json(res, 200, out);
    });
    server.Post("/api/watchlist/faces", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = parse_body(req);
            for (const auto& item : body.items()) {
                if (item.key() != "person_name" && item.key() != "embedding" &&
                    item.key() != "linked_plates") {
                    throw Error(Errc::SchemaError, "unknown field '" + item.key() + "'");
                }
            }
            if (!body.contains("person_name") || !body["person_name"].is_string()) {
                throw Error(Errc::SchemaError, "'person_name' must be a string");
            }
            const json& emb = body.value("embedding", json());
            if (!emb.is_array() ||
                !std::all_of(emb.begin(), emb.end(), [](const json& v) { return v.is_number(); })) {
                throw Error(Errc::SchemaError, "'embedding' must be an array of numbers");
            }
            std::vector<std::string> linked;
            if (body.contains("linked_plates")) {
                const json& lp = body["linked_plates"];
                if (!lp.is_array() ||
                    !std::all_of(lp.begin(), lp.end(), [](const json& v) { return v.is_string(); })) {
                    throw Error(Errc::SchemaError, "'linked_plates' must be an array of strings");
                }
                linked = lp.get<std::vector<std::string>>();
            }
            const auto entry = watchlist->add_face(body["person_name"].get<std::string>(),
                                                   emb.get<std::vector<double>>(), linked);
            send_json(res, 201, to_json(entry));
        });
    });
    server.Delete(R"(/api/watchlist/faces/([^/]+))",
                  [this](const httplib::Request& req, httplib::Response& res) {
                      guarded(res, [&] {
                          if (!watchlist->remove_face(req.matches[1].str())) {
                              throw Error(Errc::NotFound, "no face entry " + req.matches[1].str());
                          }
                          res.status = 204;
                      });
                  });

    server.Get("/api/events/stream", [this](const httplib::Request& req, httplib::Response& res) {
        handle_stream(req, res);
    });
}

void Service::Impl::handle_stream(const httplib::Request& req, httplib::Response& res) {
    std::string resume;
    if (req.has_header("Last-Event-ID")) {
        resume = req.get_header_value("Last-Event-ID");
    } else if (req.has_param("last_event_id")) {
        resume = req.get_param_value("last_event_id");
    }
    std::uint64_t start = 0;
    if (!resume.empty()) {
        const auto v = parse_u64(resume);
        if (!v) {
            send_error(res, 400, to_string(Errc::InvalidArgument), "Last-Event-ID must be a seq number");
            return;
        }
        start = *v;
    }
    res.set_header("Cache-Control", "no-cache");
    auto cursor = std::make_shared<std::uint64_t>(start);
    auto idle = std::make_shared<int>(0);
    res.set_chunked_content_provider(
        "text/event-stream", [this, cursor, idle](std::size_t, httplib::DataSink& sink) {
            const auto batch = hub.wait_after(*cursor, std::chrono::milliseconds(250));
            if (hub.closed() || stopping.load()) {
                sink.done();
                return true;
            }
            std::string out;
            for (const auto& [seq, line] : batch) {
                auto kind = json::parse(line).at("kind").get<std::string>();
                out += "id: " + std::to_string(seq) + "\nevent: " + kind + "\ndata: " + line + "\n\n";
                *cursor = seq;
            }
            if (out.empty()) {
                if (++*idle < 4) return true;
                out = ": keepalive\n\n";
            }
            *idle = 0;
            return sink.write(out.data(), out.size());
        });
}

Service::Service(PipelineConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
    int bound = -1;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (impl_->server.bind_to_port(host, port)) {
        bound = port;
    }
    if (bound <= 0) {
        throw Error(Errc::BindFailure, "cannot bind " + host + ":" + std::to_string(port));
    }
    return bound;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::start() {
    impl_->server_thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void Service::start_manifest_feed() {
    if (impl_->config.manifest.empty()) return;
    impl_->feed_thread = std::thread([this] {
        Impl& impl = *impl_;
        try {
            if (!impl.config.follow_manifest) {
                for (auto& f : ingest(impl.config.manifest)) {
                    if (impl.stopping) return;
                    submit(std::move(f));
                }
                return;
            }
            ManifestFollower follower(impl.config.manifest);
            while (!impl.stopping) {
                for (auto& f : follower.poll()) submit(std::move(f));
                std::this_thread::sleep_for(std::chrono::milliseconds(impl.config.follow_poll_ms));
            }
        } catch (const std::exception& e) {
            std::cerr << "sentinel: manifest feed stopped: " << e.what() << '\n';
        }
    });
}

void Service::submit(FrameRef frame) {
    std::lock_guard lock(impl_->submit_mutex);
    impl_->pipeline->submit(std::move(frame));
}

void Service::stop() {
    if (!impl_) return;
    std::call_once(impl_->stop_once, [this] {
        Impl& impl = *impl_;
        impl.stopping = true;
        if (impl.feed_thread.joinable()) impl.feed_thread.join();
        try {
            std::lock_guard lock(impl.submit_mutex);
            impl.pipeline->finish();
        } catch (const std::exception& e) {
            std::cerr << "sentinel: pipeline: " << e.what() << '\n';
        }
        impl.hub.close();
        impl.server.stop();
        if (impl.server_thread.joinable()) impl.server_thread.join();
    });
}

std::size_t Service::frames_processed() const { return impl_->pipeline->frames_processed(); }
AlertStore& Service::alerts() { return impl_->alerts; }
WatchlistStore& Service::watchlist() { return *impl_->watchlist; }
EventHub& Service::events() { return impl_->hub; }

void serve_api(const PipelineConfig& config) {
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    Service service(config);
    const int port = service.bind(config.api.bind, config.api.port);
    std::cerr << "sentinel: listening on " << config.api.bind << ':' << port << '\n';
    service.start_manifest_feed();

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        service.stop();
    });
    service.listen();
    waiter.join();
}

}  // namespace sentinel
