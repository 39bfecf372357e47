#include <doctest.h>

#include <sstream>

#include "common/scenarios.hpp"
#include "sentinel/api.hpp"
#include "sentinel/error.hpp"
#include "sentinel/eval.hpp"
#include "sentinel/pipeline.hpp"
#include "test_support.hpp"

using namespace sentinel;
using testing_support::read_file;
using testing_support::TempDir;
using testing_support::write_file;

namespace {

class ThrowingFaces final : public DetectorBackend {
public:
    std::string_view name() const noexcept override { return "throwing"; }
    std::vector<PlateReading> detect_plates(const FrameRef&) const override { return {}; }
    std::vector<FaceObservation> detect_faces(const FrameRef& frame) const override {
        if (frame.frame_id == "f3") throw Error(Errc::FrameNotFound, "no image for f3");
        return {};
    }
};

std::vector<std::string> alert_kinds(const std::filesystem::path& log) {
    std::vector<std::string> out;
    for (const auto& r : scenarios::records_of(log, EventKind::Alert)) {
        out.push_back(r.payload.at("kind").get<std::string>());
    }
    return out;
}

}  // namespace

TEST_CASE("frames without detections only produce frame records") {
    TempDir dir;
    scenarios::Script s;
    for (int i = 0; i < 5; ++i) s.frame("cam", i * 100);
    const auto c = s.save(dir.path(), {}, scenarios::kDim);
    const auto summary = run_pipeline(c);
    CHECK(summary.frames_processed == 5);
    CHECK(summary.alert_count == 0);
    const auto log = load_event_log(c.event_log);
    REQUIRE(log.records.size() == 5);
    for (const auto& r : log.records) CHECK(r.kind == EventKind::FrameProcessed);
}

TEST_CASE("vehicle switch raises one alert per cooldown window") {
    TempDir a, b;
    CHECK(alert_kinds(run_pipeline(scenarios::vehicle_switch(a.path(), false)).event_log_path) ==
          std::vector<std::string>{"VEHICLE_SWITCH"});
    const auto beyond = scenarios::vehicle_switch(b.path(), true);
    run_pipeline(beyond);
    const auto alerts = scenarios::records_of(beyond.event_log, EventKind::Alert);
    REQUIRE(alerts.size() == 2);
    CHECK(alerts[0].payload.at("created_at_ms") == 900);
    CHECK(alerts[1].payload.at("created_at_ms") == 40900);
    CHECK(alerts[0].payload.at("entity_key") == "F1");
    CHECK(alerts[0].payload.at("evidence").at("consensus_plate") == "DL3CAB0001");
}

TEST_CASE("a suspect in their own car is a confirmed sighting") {
    TempDir dir;
    scenarios::Script s;
    for (int i = 0; i < 10; ++i) {
        auto& f = s.frame("cam1", 100 * i);
        scenarios::Script::plate(f, "MH12AB1234", {100, 100, 400, 300});
        scenarios::Script::face(f, {200, 120, 260, 190}, scenarios::suspect_embedding());
    }
    const auto c = s.save(dir.path(), scenarios::suspect_watchlist(), scenarios::kDim);
    run_pipeline(c);
    CHECK(alert_kinds(c.event_log) == std::vector<std::string>{"CONFIRMED_SUSPECT"});
}

TEST_CASE("event log does not depend on queue capacity") {
    TempDir dir;
    auto c = scenarios::busy_stream(dir.path(), 300, 5);
    c.queue_capacity = 1;
    run_pipeline(c);
    const std::string small = read_file(c.event_log);
    c.queue_capacity = 64;
    run_pipeline(c);
    CHECK(read_file(c.event_log) == small);
    CHECK_FALSE(scenarios::records_of(c.event_log, EventKind::Alert).empty());
}

TEST_CASE("stage failures surface with the stage name") {
    TempDir dir;
    PipelineConfig c;
    c.event_log = dir / "events.jsonl";
    c.backend.fixture = dir / "unused.jsonl";
    auto wl = std::make_shared<WatchlistStore>("", c.embedding_dim);
    Pipeline p(c, std::make_shared<ThrowingFaces>(), wl);
    try {
        for (int i = 0; i < 10; ++i) p.submit({"f" + std::to_string(i), "cam", i, ""});
        p.finish();
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::FrameNotFound);
        CHECK(std::string(e.what()).find("face stage") != std::string::npos);
    }
}

TEST_CASE("alert store transitions") {
    AlertStore store;
    Alert a;
    a.alert_id = 1;
    store.add(a, 10);
    a.alert_id = 2;
    store.add(a, 20);
    CHECK(store.open_count() == 2);
    CHECK(store.list(std::nullopt, 10).size() == 1);

    CHECK(store.transition(1, AlertStatus::Acknowledged).alert.status == AlertStatus::Acknowledged);
    CHECK_THROWS_AS(store.transition(1, AlertStatus::Dismissed), Error);
    CHECK_THROWS_AS(store.transition(2, AlertStatus::Open), Error);
    try {
        store.transition(9, AlertStatus::Dismissed);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NotFound);
    }
    CHECK(store.open_count() == 1);
    CHECK(store.list(AlertStatus::Open, 0).front().alert.alert_id == 2);
}

TEST_CASE("event hub replays after a seq and wakes waiters") {
    EventHub hub;
    for (std::uint64_t s = 1; s <= 3; ++s) hub.publish({s, EventKind::FrameProcessed, {{"i", s}}, 0});
    auto got = hub.wait_after(1, std::chrono::milliseconds(0));
    REQUIRE(got.size() == 2);
    CHECK(got[0].first == 2);
    CHECK(hub.wait_after(3, std::chrono::milliseconds(10)).empty());

    std::thread later([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        hub.publish({4, EventKind::FrameProcessed, {}, 0});
    });
    got = hub.wait_after(3, std::chrono::seconds(5));
    later.join();
    REQUIRE(got.size() == 1);
    CHECK(got[0].first == 4);
    hub.close();
    CHECK(hub.wait_after(0, std::chrono::seconds(5)).empty());
}

TEST_CASE("eval loader") {
    std::istringstream gt(R"({"image_id":"a","class_id":0,"bbox":[0,0,10,10]}
{"image_id":"b"}
)");
    std::istringstream pred(R"({"image_id":"b","class_id":1,"bbox":[0,0,5,5],"confidence":0.5})");
    const auto ds = load_eval_dataset(gt, pred);
    REQUIRE(ds.images.size() == 2);
    CHECK(ds.images[1].gts.empty());
    CHECK(ds.images[1].preds.size() == 1);
    CHECK(ds.class_names == std::vector<std::string>{"0", "1"});

    auto load = [](std::string g, std::string p) {
        std::istringstream gi(g), pi(p);
        return load_eval_dataset(gi, pi);
    };
    try {
        load(R"({"image_id":"a"})", "\n" R"({"image_id":"z","class_id":0,"bbox":[0,0,1,1],"confidence":0.5})");
        FAIL("expected an error");
    } catch (const SchemaError& e) {
        CHECK(e.code() == Errc::UnknownImageId);
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(load(R"({"image_id":"a","class_id":0,"bbox":[0,0,1,1],"confidence":0.5})", ""), Error);
    CHECK_THROWS_AS(load(R"({"image_id":"a"})", R"({"image_id":"a","class_id":0,"bbox":[0,0,1,1]})"), Error);
    CHECK_THROWS_AS(load(R"({"image_id":"a","class_id":0})", ""), Error);
    std::istringstream g2(R"({"image_id":"a","class_id":3,"bbox":[0,0,1,1]})"), p2("");
    CHECK_THROWS_AS(load_eval_dataset(g2, p2, std::vector<std::string>{"x"}), Error);
}

TEST_CASE("iou threshold specs") {
    CHECK(parse_iou_spec("0.5") == std::vector<double>{0.5});
    const auto t = parse_iou_spec("0.5:0.95:0.05");
    REQUIRE(t.size() == 10);
    CHECK(t[3] == 0.65);
    CHECK(t[9] == 0.95);
    CHECK_THROWS_AS(parse_iou_spec("0.5:0.9"), Error);
    CHECK_THROWS_AS(parse_iou_spec("half"), Error);
    CHECK_THROWS_AS(parse_iou_spec("1.5"), Error);
    CHECK_THROWS_AS(parse_iou_spec("0.9:0.5:0.1"), Error);
}
