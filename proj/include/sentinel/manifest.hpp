#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sentinel/backend.hpp"

namespace sentinel {

/// Reads and validates a whole manifest, then returns its frames in global
/// order: timestamp, then camera id, then frame id. Nothing is returned
/// unless every line validates.
///
/// Errors: SchemaError(ManifestSchemaError) for malformed lines or
/// duplicate frame ids; SchemaError(NonMonotoneTimestamps) when a camera's
/// timestamps decrease in file order.
std::vector<FrameRef> ingest(const std::filesystem::path& manifest_path);
std::vector<FrameRef> ingest(std::istream& in);

/// Incremental manifest reader for live operation. Each poll() returns the
/// complete lines appended since the previous call, validated against
/// everything seen so far. A trailing line without a newline is left for
/// the next poll.
class ManifestFollower {
public:
    explicit ManifestFollower(std::filesystem::path path) : path_(std::move(path)) {}

    std::vector<FrameRef> poll();

private:
    std::filesystem::path path_;
    std::uintmax_t offset_ = 0;
    std::size_t line_ = 0;
    std::set<std::string> frame_ids_;
    std::map<std::string, std::int64_t> last_ts_;
};

}  // namespace sentinel
