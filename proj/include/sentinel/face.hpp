#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/plate.hpp"

namespace sentinel {

inline constexpr std::size_t kDefaultEmbeddingDim = 128;
inline constexpr double kDefaultTauFace = 0.6;

/// Opaque face feature vector. All components finite.
class Embedding {
public:
    Embedding() = default;
    /// Throws Error(InvalidArgument) on non-finite components.
    explicit Embedding(std::vector<double> values);

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const Embedding&, const Embedding&) = default;

private:
    std::vector<double> values_;
};

enum class FaceMetric { L2, Cosine };

/// Parses "l2" or "cosine".
FaceMetric parse_face_metric(std::string_view name);
std::string_view to_string(FaceMetric metric) noexcept;

/// Euclidean distance, or 1 - cosine similarity for FaceMetric::Cosine.
/// Throws Error(DimensionMismatch).
double embedding_distance(const Embedding& a, const Embedding& b,
                          FaceMetric metric = FaceMetric::L2);

struct GalleryEntry {
    std::string entry_id;
    std::string person_name;
    Embedding embedding;
    std::vector<CanonicalPlate> linked_plates;
};

struct FaceMatchResult {
    std::vector<bool> booleans;          // aligned with gallery order
    std::optional<std::size_t> best_index;
    double best_distance = 0.0;          // meaningful only with best_index
};

/// booleans[i] = distance(probe, gallery[i]) <= tau_face; best_index is the
/// nearest matching entry, lowest index on ties.
FaceMatchResult match_gallery(const Embedding& probe, std::span<const GalleryEntry> gallery,
                              double tau_face = kDefaultTauFace,
                              FaceMetric metric = FaceMetric::L2);

}  // namespace sentinel
