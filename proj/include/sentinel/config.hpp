#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/face.hpp"
#include "sentinel/fusion.hpp"
#include "sentinel/plate.hpp"
#include "sentinel/tracker.hpp"

namespace sentinel {

/// Model files for the optional OpenCV DNN backend.
struct NeuralBackendConfig {
    std::filesystem::path plate_model;           // YOLOv8-style detector, ONNX
    std::filesystem::path ocr_model;             // CTC text recognizer, ONNX
    std::filesystem::path face_detector_model;   // YuNet, ONNX
    std::filesystem::path face_embedding_model;  // SFace, ONNX
    std::string ocr_alphabet = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    int plate_input_size = 640;
    int ocr_input_width = 100;
    int ocr_input_height = 32;
    double plate_score_threshold = 0.25;
    double nms_iou = 0.45;
    double face_score_threshold = 0.9;
};

struct BackendConfig {
    std::string kind = "stub";   // "stub" or "onnx"
    std::filesystem::path fixture;
    NeuralBackendConfig neural;
};

struct ApiConfig {
    std::string bind = "127.0.0.1";
    int port = 8080;
};

struct PipelineConfig {
    double tau_face = kDefaultTauFace;
    FaceMetric face_metric = FaceMetric::L2;
    double tau_plate = kDefaultTauPlate;
    double iou_assoc = kDefaultIouAssoc;
    std::size_t max_age = kDefaultMaxAge;
    std::int64_t cooldown_ms = kDefaultCooldownMs;
    std::size_t checkpoint_every = 10;
    std::vector<std::string> confusables{"O0", "I1", "B8", "S5", "Z2"};
    std::size_t queue_capacity = 64;
    std::size_t embedding_dim = kDefaultEmbeddingDim;
    BackendConfig backend;
    std::filesystem::path manifest;
    std::filesystem::path event_log;
    std::filesystem::path watchlist;   // empty: in-memory watchlist only
    bool follow_manifest = false;      // serve: keep ingesting lines appended to the manifest
    int follow_poll_ms = 200;
    ApiConfig api;

    ConfusableTable confusable_table() const { return ConfusableTable(confusables); }
};

/// Parses a config document. Relative paths resolve against base_dir.
/// Unknown keys and out-of-range values throw Error(ConfigError).
PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

PipelineConfig load_config(const std::filesystem::path& path);

/// Throws Error(ConfigError) when a threshold is outside its documented range.
void validate(const PipelineConfig& config);

}  // namespace sentinel
