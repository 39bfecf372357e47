#include "sentinel/backend.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "sentinel/error.hpp"
#include "sentinel/jsonl.hpp"

namespace sentinel {

namespace {

constexpr Errc kSchema = Errc::SchemaError;

double get_unit(const jsonl::json& obj, std::string_view key, std::size_t line) {
    const double v = jsonl::get_number(obj, key, line, kSchema);
    if (v < 0.0 || v > 1.0) {
        throw SchemaError(kSchema, line, "field '" + std::string(key) + "' must be in [0, 1]");
    }
    return v;
}

template <typename T>
void sort_by_confidence(std::vector<T>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const T& a, const T& b) {
        return a.detection.confidence > b.detection.confidence;
    });
}

}  // namespace

StubBackend StubBackend::load(const std::filesystem::path& path, std::size_t embedding_dim) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::IoError, "cannot open stub fixture " + path.string());
    }
    return parse(in, embedding_dim);
}

StubBackend StubBackend::parse(std::istream& in, std::size_t embedding_dim) {
    StubBackend backend;
    std::set<std::string, std::less<>> closed;   // frames whose block has ended
    std::string current;
    // Identity of each row within its frame, for exact-duplicate detection.
    std::set<std::string> row_keys;

    jsonl::for_each_record(in, kSchema, [&](std::size_t line, const jsonl::json& obj) {
        jsonl::check_keys(obj,
                          {"frame_id", "kind", "bbox", "confidence", "raw_text",
                           "text_confidence", "embedding"},
                          line, kSchema);
        const std::string frame_id = jsonl::get_string(obj, "frame_id", line, kSchema);
        if (frame_id.empty()) {
            throw SchemaError(kSchema, line, "frame_id must be non-empty");
        }
        const std::string kind = jsonl::get_string(obj, "kind", line, kSchema);
        const BBox box = jsonl::get_bbox(obj, "bbox", line, kSchema);
        const double confidence = get_unit(obj, "confidence", line);

        if (frame_id != current) {
            if (closed.count(frame_id) != 0) {
                throw SchemaError(Errc::DuplicateFrameRow, line,
                                  "frame '" + frame_id + "' appears in two separate blocks");
            }
            if (!current.empty()) closed.insert(current);
            current = frame_id;
            row_keys.clear();
        }
        if (!row_keys.insert(kind + obj.at("bbox").dump()).second) {
            throw SchemaError(Errc::DuplicateFrameRow, line,
                              "frame '" + frame_id + "' repeats a " + kind + " row");
        }

        FrameRows& rows = backend.frames_[frame_id];
        if (kind == "plate") {
            if (obj.contains("embedding")) {
                throw SchemaError(kSchema, line, "plate rows cannot carry an embedding");
            }
            PlateReading r;
            r.detection = {box, kPlateClass, confidence};
            r.raw_text = jsonl::get_string(obj, "raw_text", line, kSchema);
            r.text_confidence =
                obj.contains("text_confidence") ? get_unit(obj, "text_confidence", line) : confidence;
            rows.plates.push_back(std::move(r));
        } else if (kind == "face") {
            if (obj.contains("raw_text") || obj.contains("text_confidence")) {
                throw SchemaError(kSchema, line, "face rows cannot carry plate text");
            }
            const auto it = obj.find("embedding");
            if (it == obj.end() || !it->is_array()) {
                throw SchemaError(kSchema, line, "face rows need an 'embedding' array");
            }
            if (it->size() != embedding_dim) {
                throw SchemaError(kSchema, line,
                                  "embedding has " + std::to_string(it->size()) +
                                      " values, expected " + std::to_string(embedding_dim));
            }
            std::vector<double> values;
            values.reserve(it->size());
            for (const auto& v : *it) {
                if (!v.is_number()) {
                    throw SchemaError(kSchema, line, "embedding values must be numbers");
                }
                values.push_back(v.get<double>());
            }
            try {
                rows.faces.push_back({{box, kFaceClass, confidence}, Embedding(std::move(values))});
            } catch (const Error& e) {
                throw SchemaError(kSchema, line, e.what());
            }
        } else {
            throw SchemaError(kSchema, line, "kind must be \"plate\" or \"face\"");
        }
    });

    for (auto& [id, rows] : backend.frames_) {
        sort_by_confidence(rows.plates);
        sort_by_confidence(rows.faces);
    }
    return backend;
}

std::vector<PlateReading> StubBackend::detect_plates(const FrameRef& frame) const {
    const auto it = frames_.find(frame.frame_id);
    return it == frames_.end() ? std::vector<PlateReading>{} : it->second.plates;
}

std::vector<FaceObservation> StubBackend::detect_faces(const FrameRef& frame) const {
    const auto it = frames_.find(frame.frame_id);
    return it == frames_.end() ? std::vector<FaceObservation>{} : it->second.faces;
}

namespace {

void check_detection(const Detection& d, std::string_view backend, const FrameRef& frame) {
    auto fail = [&](const std::string& what) {
        throw Error(Errc::SchemaError, std::string(backend) + " backend returned " + what +
                                           " for frame '" + frame.frame_id + "'");
    };
    if (!d.bbox.valid()) fail("an invalid box");
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) fail("a confidence outside [0, 1]");
}

}  // namespace

std::vector<PlateReading> ValidatingBackend::detect_plates(const FrameRef& frame) const {
    auto rows = inner_->detect_plates(frame);
    for (const auto& r : rows) {
        check_detection(r.detection, name(), frame);
        if (!(r.text_confidence >= 0.0 && r.text_confidence <= 1.0)) {
            throw Error(Errc::SchemaError, std::string(name()) +
                                               " backend returned a text confidence outside [0, 1]");
        }
    }
    sort_by_confidence(rows);
    return rows;
}

std::vector<FaceObservation> ValidatingBackend::detect_faces(const FrameRef& frame) const {
    auto rows = inner_->detect_faces(frame);
    for (const auto& r : rows) {
        check_detection(r.detection, name(), frame);
        if (r.embedding.dim() != embedding_dim_) {
            throw Error(Errc::DimensionMismatch,
                        std::string(name()) + " backend returned a " +
                            std::to_string(r.embedding.dim()) + "-d embedding, expected " +
                            std::to_string(embedding_dim_));
        }
    }
    sort_by_confidence(rows);
    return rows;
}

}  // namespace sentinel
