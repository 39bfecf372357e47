#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/metrics.hpp"

namespace sentinel {

/// Maps boxes from a letterboxed network input back to source pixels.
struct Letterbox {
    double scale = 1.0;   // network pixels per source pixel
    double pad_x = 0.0;
    double pad_y = 0.0;

    /// Uniform scale to fit (width, height) into a square of `side`, centered.
    static Letterbox fit(int width, int height, int side);
};

/// Decodes a YOLOv8-style head laid out as [4 + num_classes, num_anchors]
/// (cx, cy, w, h, then one score per class). Keeps anchors whose best score
/// reaches score_threshold, clips to the source image, and returns them
/// unsorted.
std::vector<Detection> decode_yolov8(std::span<const float> output, std::size_t num_classes,
                                     std::size_t num_anchors, double score_threshold,
                                     const Letterbox& letterbox, int image_width,
                                     int image_height);

/// Greedy class-aware non-maximum suppression. Returns kept detections by
/// descending confidence.
std::vector<Detection> non_max_suppression(std::vector<Detection> detections, double iou_threshold);

struct CtcDecoded {
    std::string text;
    double confidence = 0.0;   // mean best-path probability over emitted characters
};

/// Best-path CTC decoding of [steps, classes] scores, blank at index 0 and
/// alphabet[i] at index i + 1. Scores are softmaxed per step when
/// `logits` is true.
CtcDecoded ctc_greedy_decode(std::span<const float> scores, std::size_t steps,
                             std::size_t classes, std::string_view alphabet, bool logits);

}  // namespace sentinel
