#include "sentinel/config.hpp"

#include <fstream>
#include <set>

#include "sentinel/error.hpp"

namespace sentinel {

namespace {

using nlohmann::json;

class Reader {
public:
    Reader(const json& obj, std::string scope, const std::filesystem::path& base)
        : obj_(obj), scope_(std::move(scope)), base_(base) {
        if (!obj_.is_object()) fail("", "must be an object");
    }

    /// Rejects keys that no accessor asked for.
    void done() const {
        for (const auto& item : obj_.items()) {
            if (!seen_.count(item.key())) fail(item.key(), "unknown key");
        }
    }

    template <typename F>
    void visit(const char* key, F&& fn) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        if (it != obj_.end()) fn(*it);
    }

    void number(const char* key, double& out) {
        visit(key, [&](const json& v) {
            if (!v.is_number()) fail(key, "must be a number");
            out = v.get<double>();
        });
    }

    template <typename Int>
    void integer(const char* key, Int& out) {
        visit(key, [&](const json& v) {
            if (!v.is_number_integer()) fail(key, "must be an integer");
            const auto raw = v.get<std::int64_t>();
            if (std::is_unsigned_v<Int> && raw < 0) fail(key, "must be non-negative");
            out = static_cast<Int>(raw);
        });
    }

    void boolean(const char* key, bool& out) {
        visit(key, [&](const json& v) {
            if (!v.is_boolean()) fail(key, "must be a boolean");
            out = v.get<bool>();
        });
    }

    void string(const char* key, std::string& out) {
        visit(key, [&](const json& v) {
            if (!v.is_string()) fail(key, "must be a string");
            out = v.get<std::string>();
        });
    }

    void path(const char* key, std::filesystem::path& out) {
        std::string s;
        string(key, s);
        if (!s.empty()) {
            std::filesystem::path p(s);
            out = p.is_absolute() ? p : base_ / p;
        }
    }

    void strings(const char* key, std::vector<std::string>& out) {
        visit(key, [&](const json& v) {
            if (!v.is_array()) fail(key, "must be an array of strings");
            out.clear();
            for (const auto& s : v) {
                if (!s.is_string()) fail(key, "must be an array of strings");
                out.push_back(s.get<std::string>());
            }
        });
    }

    template <typename F>
    void object(const char* key, F&& fn) {
        visit(key, [&](const json& v) {
            Reader nested(v, scope_ + key + ".", base_);
            fn(nested);
            nested.done();
        });
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw Error(Errc::ConfigError, "config: " + scope_ + key + ": " + what);
    }

private:
    const json& obj_;
    std::string scope_;
    const std::filesystem::path& base_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw Error(Errc::ConfigError, "config: " + message);
}

}  // namespace

PipelineConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    PipelineConfig c;
    {
        Reader r(doc, "", base_dir);
        r.number("tau_face", c.tau_face);
        r.visit("face_metric", [&](const json& v) {
            if (!v.is_string()) r.fail("face_metric", "must be a string");
            c.face_metric = parse_face_metric(v.get<std::string>());
        });
        r.number("tau_plate", c.tau_plate);
        r.number("iou_assoc", c.iou_assoc);
        r.integer("max_age", c.max_age);
        r.integer("cooldown_ms", c.cooldown_ms);
        r.integer("checkpoint_every", c.checkpoint_every);
        r.strings("confusables", c.confusables);
        r.integer("queue_capacity", c.queue_capacity);
        r.integer("embedding_dim", c.embedding_dim);
        r.object("backend", [&](Reader& b) {
            b.string("kind", c.backend.kind);
            b.path("fixture", c.backend.fixture);
            b.object("onnx", [&](Reader& n) {
                auto& m = c.backend.neural;
                n.path("plate_model", m.plate_model);
                n.path("ocr_model", m.ocr_model);
                n.path("face_detector_model", m.face_detector_model);
                n.path("face_embedding_model", m.face_embedding_model);
                n.string("ocr_alphabet", m.ocr_alphabet);
                n.integer("plate_input_size", m.plate_input_size);
                n.integer("ocr_input_width", m.ocr_input_width);
                n.integer("ocr_input_height", m.ocr_input_height);
                n.number("plate_score_threshold", m.plate_score_threshold);
                n.number("nms_iou", m.nms_iou);
                n.number("face_score_threshold", m.face_score_threshold);
            });
        });
        r.path("manifest", c.manifest);
        r.path("event_log", c.event_log);
        r.path("watchlist", c.watchlist);
        r.boolean("follow_manifest", c.follow_manifest);
        r.integer("follow_poll_ms", c.follow_poll_ms);
        r.object("api", [&](Reader& a) {
            a.string("bind", c.api.bind);
            a.integer("port", c.api.port);
        });
        r.done();
    }
    validate(c);
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::IoError, "cannot open config " + path.string());
    }
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        throw Error(Errc::ConfigError, "config: " + path.string() + " is not valid JSON");
    }
    return parse_config(doc, path.parent_path());
}

void validate(const PipelineConfig& c) {
    require(c.tau_face > 0.0, "tau_face must be > 0");
    require(c.tau_plate >= 0.0, "tau_plate must be >= 0");
    require(c.iou_assoc > 0.0 && c.iou_assoc < 1.0, "iou_assoc must be in (0, 1)");
    require(c.max_age >= 1, "max_age must be >= 1");
    require(c.cooldown_ms >= 0, "cooldown_ms must be >= 0");
    require(c.checkpoint_every >= 1, "checkpoint_every must be >= 1");
    require(c.queue_capacity >= 1, "queue_capacity must be >= 1");
    require(c.embedding_dim >= 1, "embedding_dim must be >= 1");
    require(c.follow_poll_ms >= 1, "follow_poll_ms must be >= 1");
    require(c.api.port >= 0 && c.api.port <= 65535, "api.port must be in [0, 65535]");
    require(c.backend.kind == "stub" || c.backend.kind == "onnx",
            "backend.kind must be \"stub\" or \"onnx\"");
    if (c.backend.kind == "stub") {
        require(!c.backend.fixture.empty(), "backend.fixture is required for the stub backend");
    } else {
        const auto& n = c.backend.neural;
        require(!n.plate_model.empty() && !n.ocr_model.empty() &&
                    !n.face_detector_model.empty() && !n.face_embedding_model.empty(),
                "backend.onnx needs plate_model, ocr_model, face_detector_model and "
                "face_embedding_model");
        require(!n.ocr_alphabet.empty(), "backend.onnx.ocr_alphabet must be non-empty");
        require(n.plate_input_size > 0 && n.ocr_input_width > 0 && n.ocr_input_height > 0,
                "backend.onnx input sizes must be positive");
        require(n.plate_score_threshold >= 0.0 && n.plate_score_threshold <= 1.0 &&
                    n.face_score_threshold >= 0.0 && n.face_score_threshold <= 1.0,
                "backend.onnx score thresholds must be in [0, 1]");
        require(n.nms_iou > 0.0 && n.nms_iou <= 1.0, "backend.onnx.nms_iou must be in (0, 1]");
    }
    try {
        (void)c.confusable_table();
    } catch (const Error& e) {
        throw Error(Errc::ConfigError, std::string("config: ") + e.what());
    }
}

}  // namespace sentinel
