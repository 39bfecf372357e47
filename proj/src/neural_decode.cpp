#include "sentinel/neural_decode.hpp"

#include <algorithm>
#include <cmath>

#include "sentinel/error.hpp"

namespace sentinel {

Letterbox Letterbox::fit(int width, int height, int side) {
    if (width <= 0 || height <= 0 || side <= 0) {
        throw Error(Errc::InvalidArgument, "letterbox needs positive sizes");
    }
    Letterbox lb;
    lb.scale = std::min(static_cast<double>(side) / width, static_cast<double>(side) / height);
    lb.pad_x = (side - width * lb.scale) / 2.0;
    lb.pad_y = (side - height * lb.scale) / 2.0;
    return lb;
}

std::vector<Detection> decode_yolov8(std::span<const float> output, std::size_t num_classes,
                                     std::size_t num_anchors, double score_threshold,
                                     const Letterbox& lb, int image_width, int image_height) {
    if (output.size() != (4 + num_classes) * num_anchors) {
        throw Error(Errc::DimensionMismatch, "detector output has unexpected size");
    }
    auto at = [&](std::size_t row, std::size_t anchor) {
        return static_cast<double>(output[row * num_anchors + anchor]);
    };
    auto clip = [](double v, double hi) { return std::clamp(v, 0.0, hi); };

    std::vector<Detection> out;
    for (std::size_t a = 0; a < num_anchors; ++a) {
        std::size_t best_class = 0;
        double best = -1.0;
        for (std::size_t c = 0; c < num_classes; ++c) {
            const double s = at(4 + c, a);
            if (s > best) {
                best = s;
                best_class = c;
            }
        }
        if (best < score_threshold) continue;
        const double cx = (at(0, a) - lb.pad_x) / lb.scale;
        const double cy = (at(1, a) - lb.pad_y) / lb.scale;
        const double w = at(2, a) / lb.scale;
        const double h = at(3, a) / lb.scale;
        BBox box{clip(cx - w / 2, image_width), clip(cy - h / 2, image_height),
                 clip(cx + w / 2, image_width), clip(cy + h / 2, image_height)};
        if (!box.valid() || box.area() <= 0.0) continue;   // entirely in the padding
        out.push_back({box, static_cast<int>(best_class), std::clamp(best, 0.0, 1.0)});
    }
    return out;
}

std::vector<Detection> non_max_suppression(std::vector<Detection> detections, double iou_threshold) {
    std::stable_sort(detections.begin(), detections.end(),
                     [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
    std::vector<Detection> kept;
    for (const auto& d : detections) {
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
            return k.class_id == d.class_id && iou(k.bbox, d.bbox) > iou_threshold;
        });
        if (!suppressed) kept.push_back(d);
    }
    return kept;
}

CtcDecoded ctc_greedy_decode(std::span<const float> scores, std::size_t steps,
                             std::size_t classes, std::string_view alphabet, bool logits) {
    if (scores.size() != steps * classes) {
        throw Error(Errc::DimensionMismatch, "recognizer output has unexpected size");
    }
    if (classes != alphabet.size() + 1) {
        throw Error(Errc::DimensionMismatch, "recognizer class count does not match alphabet + blank");
    }
    CtcDecoded out;
    double prob_sum = 0.0;
    std::size_t previous = 0;
    for (std::size_t t = 0; t < steps; ++t) {
        const auto row = scores.subspan(t * classes, classes);
        const auto best_it = std::max_element(row.begin(), row.end());
        const auto best = static_cast<std::size_t>(best_it - row.begin());
        double p = *best_it;
        if (logits) {
            double denom = 0.0;
            for (float v : row) denom += std::exp(static_cast<double>(v - *best_it));
            p = 1.0 / denom;
        }
        if (best != 0 && best != previous) {
            out.text.push_back(alphabet[best - 1]);
            prob_sum += p;
        }
        previous = best;
    }
    out.confidence = out.text.empty() ? 0.0 : std::clamp(prob_sum / out.text.size(), 0.0, 1.0);
    return out;
}

}  // namespace sentinel
