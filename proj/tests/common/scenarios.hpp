#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/config.hpp"
#include "sentinel/event_log.hpp"
#include "sentinel/watchlist.hpp"

namespace scenarios {

using nlohmann::json;
namespace fs = std::filesystem;

/// Frames and fixture rows under construction; written out by save().
class Script {
public:
    struct Frame {
        std::string frame_id;
        std::string camera_id;
        std::int64_t timestamp_ms = 0;
        std::vector<json> rows;
    };

    Frame& frame(const std::string& camera, std::int64_t t) {
        frames_.push_back({camera + "-" + std::to_string(t), camera, t, {}});
        return frames_.back();
    }

    static void plate(Frame& f, const std::string& text, std::vector<double> box, double conf = 0.9) {
        f.rows.push_back({{"frame_id", f.frame_id}, {"kind", "plate"}, {"bbox", box},
                          {"confidence", conf}, {"raw_text", text}});
    }
    static void face(Frame& f, std::vector<double> box, std::vector<double> embedding) {
        f.rows.push_back({{"frame_id", f.frame_id}, {"kind", "face"}, {"bbox", box},
                          {"confidence", 0.95}, {"embedding", embedding}});
    }

    std::size_t size() const { return frames_.size(); }

    /// Writes manifest.jsonl, fixture.jsonl and a config in dir.
    sentinel::PipelineConfig save(const fs::path& dir, const sentinel::Watchlist& watchlist,
                                  std::size_t embedding_dim) const {
        std::ofstream manifest(dir / "manifest.jsonl"), fixture(dir / "fixture.jsonl");
        for (const auto& f : frames_) {
            manifest << json{{"frame_id", f.frame_id}, {"camera_id", f.camera_id},
                             {"timestamp_ms", f.timestamp_ms},
                             {"image_path", "frames/" + f.frame_id + ".jpg"}}.dump() << '\n';
            for (const auto& r : f.rows) fixture << r.dump() << '\n';
        }
        sentinel::save_watchlist_atomic(dir / "watchlist.json", watchlist);

        sentinel::PipelineConfig c;
        c.embedding_dim = embedding_dim;
        c.backend.kind = "stub";
        c.backend.fixture = dir / "fixture.jsonl";
        c.manifest = dir / "manifest.jsonl";
        c.event_log = dir / "events.jsonl";
        c.watchlist = dir / "watchlist.json";
        return c;
    }

private:
    std::vector<Frame> frames_;
};

inline constexpr std::size_t kDim = 4;

inline std::vector<double> suspect_embedding() { return {1.0, 0.0, 0.0, 0.0}; }

/// One suspect whose face entry links to MH12AB1234.
inline sentinel::Watchlist suspect_watchlist() {
    sentinel::Watchlist w;
    w.faces.push_back({"F1", "Suspect", sentinel::Embedding(suspect_embedding()),
                       {sentinel::CanonicalPlate::from_canonical("MH12AB1234")}});
    w.next_id = 2;
    return w;
}

/// The suspect rides in a car plated DL3CAB0001 for 12 frames starting at
/// `start`, then the camera sees nothing for 8 frames.
inline void vehicle_switch_appearance(Script& s, std::int64_t start) {
    for (int i = 0; i < 12; ++i) {
        auto& f = s.frame("cam1", start + 100 * i);
        Script::plate(f, "DL 3C AB 0001", {100.0 + i, 100, 400.0 + i, 300});
        Script::face(f, {200.0 + i, 120, 260.0 + i, 190}, {0.98, 0.05, 0.0, 0.1});
    }
    for (int i = 12; i < 20; ++i) s.frame("cam1", start + 100 * i);
}

/// Appearances at t=0 and t=10000 (inside a 30 s cooldown), plus one at
/// t=40000 when `beyond_cooldown` is set.
inline sentinel::PipelineConfig vehicle_switch(const fs::path& dir, bool beyond_cooldown) {
    Script s;
    vehicle_switch_appearance(s, 0);
    vehicle_switch_appearance(s, 10000);
    if (beyond_cooldown) vehicle_switch_appearance(s, 40000);
    auto c = s.save(dir, suspect_watchlist(), kDim);
    c.cooldown_ms = 30000;
    c.checkpoint_every = 10;
    c.max_age = 5;
    return c;
}

/// Multi-camera traffic: vehicles drift across the frame, some carrying
/// watchlisted plates or suspect faces, with occasional OCR noise.
inline sentinel::PipelineConfig busy_stream(const fs::path& dir, std::size_t frames, unsigned seed) {
    std::mt19937 rng(seed);
    const std::vector<std::string> cameras{"gate", "lane1", "lane2"};
    const std::vector<std::string> plates{"MH12AB1234", "DL3CAB0001", "KA01F555", "TN09BX4321",
                                          "GJ5XY7", "UP14C9999", "HR26DK8337", "WB2A100"};
    struct Vehicle {
        std::string plate;
        double x = 0;
        double y = 0;
        bool face = false;
        bool suspect = false;
        int left = 0;
    };
    std::vector<std::vector<Vehicle>> live(cameras.size());
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Script s;
    for (std::size_t n = 0; n < frames; ++n) {
        const std::size_t c = n % cameras.size();
        auto& f = s.frame(cameras[c], static_cast<std::int64_t>(n / cameras.size()) * 40 + 7 * c);
        auto& vs = live[c];
        if (vs.size() < 3 && unit(rng) < 0.15) {
            vs.push_back({plates[rng() % plates.size()], 20.0 + 400 * (vs.size() % 2), 50.0 + 150 * vs.size(),
                          unit(rng) < 0.6, unit(rng) < 0.3, 15 + static_cast<int>(rng() % 40)});
        }
        for (auto& v : vs) {
            v.x += 3.0;
            --v.left;
            if (unit(rng) < 0.1) continue;   // missed detection
            std::string text = v.plate;
            if (unit(rng) < 0.1) text[text.size() - 1] = text.back() == '1' ? 'I' : '1';
            Script::plate(f, text, {v.x, v.y, v.x + 160, v.y + 90}, 0.5 + 0.4 * unit(rng));
            if (v.face) {
                std::vector<double> e = v.suspect ? std::vector<double>{0.97, 0.1, 0.05, 0.0}
                                                  : std::vector<double>{0.0, 1.0, 0.2, 0.1};
                Script::face(f, {v.x + 40, v.y + 10, v.x + 80, v.y + 50}, e);
            }
        }
        std::erase_if(vs, [](const Vehicle& v) { return v.left <= 0; });
    }

    sentinel::Watchlist w = suspect_watchlist();
    w.plates.push_back({"P2", sentinel::CanonicalPlate::from_canonical("KA01F555"), "stolen"});
    w.plates.push_back({"P3", sentinel::CanonicalPlate::from_canonical("HR26DK8337"), "unpaid"});
    w.next_id = 4;
    auto c = s.save(dir, w, kDim);
    c.cooldown_ms = 2000;
    return c;
}

inline std::vector<sentinel::EventLogRecord> records_of(const fs::path& log, sentinel::EventKind kind) {
    std::vector<sentinel::EventLogRecord> out;
    for (auto& r : sentinel::load_event_log(log).records) {
        if (r.kind == kind) out.push_back(std::move(r));
    }
    return out;
}

}  // namespace scenarios
