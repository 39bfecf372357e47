#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/face.hpp"
#include "sentinel/plate.hpp"

namespace sentinel {

struct Watchlist {
    std::vector<PlateWatchEntry> plates;
    std::vector<GalleryEntry> faces;
    std::uint64_t next_id = 1;
};

/// Plate entries followed by every face entry's linked plates (entry id of
/// the face entry, label "linked:<person>"). Fusion matches plates against
/// this list so a suspect's own vehicle counts as a plate hit.
std::vector<PlateWatchEntry> effective_plate_watchlist(const Watchlist& watchlist);

nlohmann::json to_json(const Watchlist& watchlist);
nlohmann::json to_json(const PlateWatchEntry& entry);
nlohmann::json to_json(const GalleryEntry& entry);

/// Throws Error(SchemaError) on malformed documents or embeddings of the
/// wrong dimension.
Watchlist watchlist_from_json(const nlohmann::json& doc, std::size_t embedding_dim);

Watchlist load_watchlist(const std::filesystem::path& path, std::size_t embedding_dim);

/// Writes a sibling temporary file, syncs it, then renames it over path, so
/// readers see either the old or the new document.
void save_watchlist_atomic(const std::filesystem::path& path, const Watchlist& watchlist);

/// Thread-safe owner of the live watchlist. Readers take immutable
/// snapshots; each mutation persists (when file-backed) and then publishes a
/// new snapshot.
class WatchlistStore {
public:
    /// Loads path when it exists. An empty path keeps the watchlist in memory.
    WatchlistStore(std::filesystem::path path, std::size_t embedding_dim);

    std::shared_ptr<const Watchlist> snapshot() const;

    /// Errors: EmptyAfterNormalization / TooLong for the plate text,
    /// Conflict when the canonical plate is already listed.
    PlateWatchEntry add_plate(std::string_view raw_plate, std::string label);

    /// Errors: DimensionMismatch, InvalidArgument (non-finite values or
    /// empty name), plate canonicalization errors for linked plates.
    GalleryEntry add_face(std::string person_name, std::vector<double> embedding,
                          const std::vector<std::string>& linked_plates);

    /// False when no entry has that id.
    bool remove_plate(const std::string& entry_id);
    bool remove_face(const std::string& entry_id);

    std::size_t embedding_dim() const noexcept { return embedding_dim_; }

private:
    void publish(std::shared_ptr<const Watchlist> next);

    std::filesystem::path path_;
    std::size_t embedding_dim_;
    mutable std::mutex mutex_;
    std::mutex write_mutex_;   // serializes read-modify-write cycles
    std::shared_ptr<const Watchlist> current_;
};

}  // namespace sentinel
