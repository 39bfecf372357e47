#include <doctest.h>

#include <sstream>
#include <thread>

#include "sentinel/bounded_queue.hpp"
#include "sentinel/config.hpp"
#include "sentinel/error.hpp"
#include "sentinel/event_log.hpp"
#include "sentinel/manifest.hpp"
#include "sentinel/watchlist.hpp"
#include "test_support.hpp"

using namespace sentinel;
using testing_support::read_file;
using testing_support::TempDir;
using testing_support::write_file;

namespace {

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::InvalidArgument;
}

nlohmann::json minimal_config() {
    return {{"backend", {{"kind", "stub"}, {"fixture", "fixture.jsonl"}}}};
}

std::vector<FrameRef> ingest_text(const std::string& text) {
    std::istringstream in(text);
    return ingest(in);
}

std::string manifest_line(const std::string& frame, const std::string& cam, long ts) {
    return R"({"frame_id":")" + frame + R"(","camera_id":")" + cam + R"(","timestamp_ms":)" +
           std::to_string(ts) + R"(,"image_path":"img/)" + frame + R"(.jpg"})" "\n";
}

}  // namespace

TEST_CASE("config defaults and relative paths") {
    const auto c = parse_config(minimal_config(), "/etc/sentinel");
    CHECK(c.tau_face == 0.6);
    CHECK(c.tau_plate == 1.0);
    CHECK(c.iou_assoc == 0.3);
    CHECK(c.max_age == 5);
    CHECK(c.cooldown_ms == 30000);
    CHECK(c.queue_capacity == 64);
    CHECK(c.embedding_dim == 128);
    CHECK(c.checkpoint_every == 10);
    CHECK(c.api.bind == "127.0.0.1");
    CHECK(c.backend.fixture == std::filesystem::path("/etc/sentinel/fixture.jsonl"));
}

TEST_CASE("config rejects unknown keys and bad values") {
    auto doc = minimal_config();
    doc["tau_faces"] = 0.5;
    CHECK(code_of([&] { parse_config(doc, "."); }) == Errc::ConfigError);

    doc = minimal_config();
    doc["backend"]["extra"] = 1;
    CHECK(code_of([&] { parse_config(doc, "."); }) == Errc::ConfigError);

    doc = minimal_config();
    doc["api"] = {{"bind", "0.0.0.0"}, {"prot", 1}};
    CHECK(code_of([&] { parse_config(doc, "."); }) == Errc::ConfigError);

    for (const auto& [key, value] : std::vector<std::pair<std::string, nlohmann::json>>{
             {"tau_face", 0.0},
             {"tau_plate", -1},
             {"iou_assoc", 1.0},
             {"max_age", 0},
             {"cooldown_ms", -5},
             {"queue_capacity", 0},
             {"embedding_dim", 0},
             {"tau_face", "high"},
             {"confusables", {"O-"}},
             {"max_age", 1.5},
         }) {
        doc = minimal_config();
        doc[key] = value;
        CAPTURE(key);
        CHECK_THROWS_AS(parse_config(doc, "."), Error);
    }

    doc = minimal_config();
    doc["backend"]["kind"] = "gpu";
    CHECK(code_of([&] { parse_config(doc, "."); }) == Errc::ConfigError);
    doc = minimal_config();
    doc["backend"]["kind"] = "onnx";
    CHECK(code_of([&] { parse_config(doc, "."); }) == Errc::ConfigError);
}

TEST_CASE("config file loading") {
    TempDir dir;
    write_file(dir / "c.json", R"({"backend":{"kind":"stub","fixture":"f.jsonl"},"face_metric":"cosine"})");
    const auto c = load_config(dir / "c.json");
    CHECK(c.face_metric == FaceMetric::Cosine);
    CHECK(c.backend.fixture == dir / "f.jsonl");
    write_file(dir / "bad.json", "{");
    CHECK(code_of([&] { load_config(dir / "bad.json"); }) == Errc::ConfigError);
}

TEST_CASE("manifest ingestion") {
    CHECK(ingest_text("").empty());

    const auto frames = ingest_text(manifest_line("a1", "A", 0) + manifest_line("a2", "A", 200) +
                                    manifest_line("b1", "B", 100) + manifest_line("b2", "B", 200) +
                                    "\n" + manifest_line("a0", "A", 200));
    std::vector<std::string> order;
    for (const auto& f : frames) order.push_back(f.frame_id);
    CHECK(order == std::vector<std::string>{"a1", "b1", "a0", "a2", "b2"});
    CHECK(frames[0].image_path == "img/a1.jpg");

    try {
        ingest_text(manifest_line("a1", "A", 100) + manifest_line("b1", "B", 0) + manifest_line("a2", "A", 50));
        FAIL("expected an error");
    } catch (const SchemaError& e) {
        CHECK(e.code() == Errc::NonMonotoneTimestamps);
        CHECK(e.line() == 3);
    }
    CHECK(code_of([] { ingest_text(manifest_line("a1", "A", 0) + manifest_line("a1", "B", 1)); }) ==
          Errc::ManifestSchemaError);
    CHECK(code_of([] { ingest_text(R"({"frame_id":"a","camera_id":"A","timestamp_ms":-1,"image_path":""})"); }) ==
          Errc::ManifestSchemaError);
    CHECK(code_of([] { ingest_text(R"({"frame_id":"a","camera_id":"A","timestamp_ms":1.5,"image_path":""})"); }) ==
          Errc::ManifestSchemaError);
    CHECK(code_of([] { ingest_text(R"({"frame_id":"a","camera_id":"A","timestamp_ms":1,"image_path":"","x":1})"); }) ==
          Errc::ManifestSchemaError);
    CHECK(code_of([] { ingest_text("{oops"); }) == Errc::ManifestSchemaError);
}

TEST_CASE("manifest follower reads only complete lines") {
    TempDir dir;
    const auto path = dir / "m.jsonl";
    write_file(path, "");
    ManifestFollower follower(path);
    CHECK(follower.poll().empty());

    const std::string l1 = manifest_line("f1", "A", 0), l2 = manifest_line("f2", "A", 10);
    write_file(path, l1 + l2.substr(0, 10));
    auto got = follower.poll();
    REQUIRE(got.size() == 1);
    CHECK(got[0].frame_id == "f1");

    write_file(path, l1 + l2);
    got = follower.poll();
    REQUIRE(got.size() == 1);
    CHECK(got[0].frame_id == "f2");

    write_file(path, l1 + l2 + manifest_line("f3", "A", 5));
    CHECK(code_of([&] { follower.poll(); }) == Errc::NonMonotoneTimestamps);
}

TEST_CASE("event record encoding") {
    EventLogRecord r{3, EventKind::PlateRead, {{"z", 1}, {"a", "x"}}, 1500};
    const std::string line = encode(r);
    CHECK(line == R"({"kind":"plate_read","logical_time_ms":1500,"payload":{"a":"x","z":1},"seq":3})");
    const auto back = decode(line);
    CHECK(back.seq == 3);
    CHECK(back.kind == EventKind::PlateRead);
    CHECK(back.payload == r.payload);
    CHECK(encode(back) == line);
    CHECK_THROWS_AS(decode(R"({"kind":"nope","logical_time_ms":0,"payload":{},"seq":1})"), Error);
    CHECK_THROWS_AS(decode(R"({"kind":"alert","logical_time_ms":0,"payload":{},"seq":1,"x":2})"), Error);
    CHECK_THROWS_AS(decode("[]"), Error);
}

TEST_CASE("event log survives truncation at any byte") {
    TempDir dir;
    const auto path = dir / "events.jsonl";
    {
        EventLogWriter w(path, EventLogWriter::Mode::Truncate);
        for (int i = 0; i < 6; ++i) w.append(EventKind::FrameProcessed, {{"i", i}}, i * 100);
        w.flush();
        CHECK(w.last_seq() == 6);
    }
    const std::string full = read_file(path);
    const auto complete = load_event_log(path);
    REQUIRE(complete.records.size() == 6);
    CHECK_FALSE(complete.partial_tail);

    std::size_t boundaries = 0;
    for (std::size_t cut = 0; cut <= full.size(); ++cut) {
        write_file(path, full.substr(0, cut));
        const auto loaded = load_event_log(path);
        const bool at_boundary = cut == 0 || full[cut - 1] == '\n';
        CHECK(loaded.partial_tail.has_value() == !at_boundary);
        CHECK(loaded.valid_bytes <= cut);
        for (std::size_t i = 0; i < loaded.records.size(); ++i) CHECK(loaded.records[i].seq == i + 1);
        boundaries += at_boundary;
    }
    CHECK(boundaries == 7);
}

TEST_CASE("append mode drops a partial tail and continues the sequence") {
    TempDir dir;
    const auto path = dir / "events.jsonl";
    {
        EventLogWriter w(path, EventLogWriter::Mode::Truncate);
        w.append(EventKind::TrackOpened, {{"track_id", 1}}, 0);
        w.append(EventKind::TrackClosed, {{"track_id", 1}}, 10);
    }
    std::string data = read_file(path);
    write_file(path, data + R"({"kind":"alert","seq":3,"pay)");
    {
        EventLogWriter w(path, EventLogWriter::Mode::Append);
        REQUIRE(w.recovered_tail());
        CHECK(w.recovered_tail()->starts_with(R"({"kind":"alert")"));
        CHECK(w.last_seq() == 2);
        const auto r = w.append(EventKind::FrameProcessed, {}, 20);
        CHECK(r.seq == 3);
    }
    const auto loaded = load_event_log(path);
    CHECK(loaded.records.size() == 3);
    CHECK_FALSE(loaded.partial_tail);
}

TEST_CASE("corrupt complete lines are errors") {
    TempDir dir;
    const auto path = dir / "events.jsonl";
    write_file(path, R"({"kind":"alert","logical_time_ms":0,"payload":{},"seq":1})" "\nnot json\n");
    try {
        load_event_log(path);
        FAIL("expected an error");
    } catch (const SchemaError& e) {
        CHECK(e.line() == 2);
    }
    write_file(path, R"({"kind":"alert","logical_time_ms":0,"payload":{},"seq":2})" "\n"
                     R"({"kind":"alert","logical_time_ms":0,"payload":{},"seq":2})" "\n");
    CHECK_THROWS_AS(load_event_log(path), SchemaError);
}

TEST_CASE("watchlist store persists atomically") {
    TempDir dir;
    const auto path = dir / "watchlist.json";
    {
        WatchlistStore store(path, 2);
        CHECK(store.snapshot()->plates.empty());
        const auto p = store.add_plate(" mh-12 ab 1234", "stolen");
        CHECK(p.entry_id == "P1");
        CHECK(p.plate.text() == "MH12AB1234");
        CHECK(code_of([&] { store.add_plate("MH12AB1234", ""); }) == Errc::Conflict);
        CHECK(code_of([&] { store.add_plate("--", ""); }) == Errc::EmptyAfterNormalization);

        const auto f = store.add_face("Suspect", {0.5, -0.25}, {"ka 01 f 555"});
        CHECK(f.entry_id == "F2");
        CHECK(f.linked_plates.at(0).text() == "KA01F555");
        CHECK(code_of([&] { store.add_face("X", {1.0}, {}); }) == Errc::DimensionMismatch);
        CHECK(code_of([&] { store.add_face("", {1.0, 2.0}, {}); }) == Errc::InvalidArgument);
    }
    {
        WatchlistStore store(path, 2);
        const auto snap = store.snapshot();
        REQUIRE(snap->plates.size() == 1);
        REQUIRE(snap->faces.size() == 1);
        CHECK(snap->faces[0].embedding == Embedding({0.5, -0.25}));
        CHECK(snap->next_id == 3);

        const auto effective = effective_plate_watchlist(*snap);
        REQUIRE(effective.size() == 2);
        CHECK(effective[1].entry_id == "F2");
        CHECK(effective[1].label == "linked:Suspect");

        // Old snapshots are unaffected by later mutations.
        CHECK(store.remove_plate("P1"));
        CHECK_FALSE(store.remove_plate("P1"));
        CHECK(snap->plates.size() == 1);
        CHECK(store.snapshot()->plates.empty());
        CHECK(store.remove_face("F2"));
    }
    CHECK(WatchlistStore(path, 2).snapshot()->faces.empty());
    // No temporary files left behind.
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++entries;
    CHECK(entries == 1);
}

TEST_CASE("readers never see a half-written watchlist") {
    TempDir dir;
    const auto path = dir / "watchlist.json";
    WatchlistStore store(path, 2);
    store.add_plate("AA11", "");
    std::atomic<bool> stop{false};
    std::atomic<int> reads{0};
    std::thread reader([&] {
        while (!stop) {
            const auto w = load_watchlist(path, 2);   // throws on a torn document
            CHECK(w.plates.size() >= 1);
            ++reads;
        }
    });
    for (int i = 0; i < 200; ++i) {
        const auto e = store.add_plate("BB" + std::to_string(100 + i), std::string(200, 'x'));
        store.remove_plate(e.entry_id);
    }
    stop = true;
    reader.join();
    CHECK(reads > 0);
}

TEST_CASE("watchlist documents are validated") {
    auto versioned = nlohmann::json{{"version", 2}, {"next_id", 1}, {"plates", nlohmann::json::array()},
                                    {"faces", nlohmann::json::array()}};
    CHECK(code_of([&] { watchlist_from_json(versioned, 2); }) == Errc::SchemaError);
    versioned["version"] = 1;
    CHECK_NOTHROW(watchlist_from_json(versioned, 2));
    const nlohmann::json doc{{"version", 1},
                             {"next_id", 5},
                             {"plates", nlohmann::json::array()},
                             {"faces", {{{"id", "F1"}, {"person_name", "A"}, {"embedding", {1, 2, 3}},
                                         {"linked_plates", nlohmann::json::array()}}}}};
    CHECK(code_of([&] { watchlist_from_json(doc, 2); }) == Errc::SchemaError);
    CHECK(watchlist_from_json(doc, 3).faces.size() == 1);
    CHECK(to_json(watchlist_from_json(doc, 3)) == doc);
}

TEST_CASE("bounded queue blocks at capacity and drains after close") {
    BoundedQueue<int> q(1);
    CHECK(q.push(1));
    std::atomic<bool> pushed{false};
    std::thread producer([&] {
        q.push(2);
        pushed = true;
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    CHECK_FALSE(pushed);
    CHECK(q.pop() == 1);
    producer.join();
    CHECK(pushed);
    q.close();
    CHECK_FALSE(q.push(3));
    CHECK(q.pop() == 2);
    CHECK_FALSE(q.pop());
}
