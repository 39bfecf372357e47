#include "sentinel/face.hpp"

#include <algorithm>
#include <cmath>

#include "sentinel/error.hpp"

namespace sentinel {

Embedding::Embedding(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw Error(Errc::InvalidArgument, "embedding contains a non-finite value");
        }
    }
}

FaceMetric parse_face_metric(std::string_view name) {
    if (name == "l2") return FaceMetric::L2;
    if (name == "cosine") return FaceMetric::Cosine;
    throw Error(Errc::ConfigError, "unknown face metric '" + std::string(name) + "'");
}

std::string_view to_string(FaceMetric metric) noexcept {
    return metric == FaceMetric::L2 ? "l2" : "cosine";
}

double embedding_distance(const Embedding& a, const Embedding& b, FaceMetric metric) {
    if (a.dim() != b.dim()) {
        throw Error(Errc::DimensionMismatch, "embedding dimensions differ: " +
                                                 std::to_string(a.dim()) + " vs " +
                                                 std::to_string(b.dim()));
    }
    const auto x = a.values();
    const auto y = b.values();
    if (metric == FaceMetric::L2) {
        double sum = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - y[i];
            sum += d * d;
        }
        return std::sqrt(sum);
    }
    double dot = 0.0;
    double nx = 0.0;
    double ny = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        nx += x[i] * x[i];
        ny += y[i] * y[i];
    }
    if (nx == 0.0 || ny == 0.0) {
        return 1.0;
    }
    return std::max(0.0, 1.0 - dot / (std::sqrt(nx) * std::sqrt(ny)));
}

FaceMatchResult match_gallery(const Embedding& probe, std::span<const GalleryEntry> gallery,
                              double tau_face, FaceMetric metric) {
    if (!(tau_face > 0.0)) {
        throw Error(Errc::InvalidArgument, "tau_face must be positive");
    }
    FaceMatchResult result;
    result.booleans.reserve(gallery.size());
    for (std::size_t i = 0; i < gallery.size(); ++i) {
        const double d = embedding_distance(probe, gallery[i].embedding, metric);
        const bool hit = d <= tau_face;
        result.booleans.push_back(hit);
        if (hit && (!result.best_index || d < result.best_distance)) {
            result.best_index = i;
            result.best_distance = d;
        }
    }
    return result;
}

}  // namespace sentinel
