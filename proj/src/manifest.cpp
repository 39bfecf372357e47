#include "sentinel/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include "sentinel/error.hpp"
#include "sentinel/jsonl.hpp"

namespace sentinel {

namespace {

constexpr Errc kSchema = Errc::ManifestSchemaError;

FrameRef parse_entry(std::size_t line, const jsonl::json& obj) {
    jsonl::check_keys(obj, {"frame_id", "camera_id", "timestamp_ms", "image_path"}, line, kSchema);
    FrameRef f;
    f.frame_id = jsonl::get_string(obj, "frame_id", line, kSchema);
    f.camera_id = jsonl::get_string(obj, "camera_id", line, kSchema);
    f.timestamp_ms = jsonl::get_integer(obj, "timestamp_ms", line, kSchema);
    f.image_path = jsonl::get_string(obj, "image_path", line, kSchema);
    if (f.frame_id.empty() || f.camera_id.empty()) {
        throw SchemaError(kSchema, line, "frame_id and camera_id must be non-empty");
    }
    if (f.timestamp_ms < 0) {
        throw SchemaError(kSchema, line, "timestamp_ms must be non-negative");
    }
    return f;
}

void check_entry(std::size_t line, const FrameRef& f, std::set<std::string>& ids,
                 std::map<std::string, std::int64_t>& last_ts) {
    if (!ids.insert(f.frame_id).second) {
        throw SchemaError(kSchema, line, "duplicate frame_id '" + f.frame_id + "'");
    }
    auto [it, inserted] = last_ts.try_emplace(f.camera_id, f.timestamp_ms);
    if (!inserted) {
        if (f.timestamp_ms < it->second) {
            throw SchemaError(Errc::NonMonotoneTimestamps, line,
                              "camera '" + f.camera_id + "' goes back in time: " +
                                  std::to_string(f.timestamp_ms) + " after " +
                                  std::to_string(it->second));
        }
        it->second = f.timestamp_ms;
    }
}

void sort_frames(std::vector<FrameRef>& frames) {
    std::stable_sort(frames.begin(), frames.end(), [](const FrameRef& a, const FrameRef& b) {
        return std::tie(a.timestamp_ms, a.camera_id, a.frame_id) <
               std::tie(b.timestamp_ms, b.camera_id, b.frame_id);
    });
}

}  // namespace

std::vector<FrameRef> ingest(std::istream& in) {
    std::vector<FrameRef> frames;
    std::set<std::string> ids;
    std::map<std::string, std::int64_t> last_ts;
    jsonl::for_each_record(in, kSchema, [&](std::size_t line, const jsonl::json& obj) {
        FrameRef f = parse_entry(line, obj);
        check_entry(line, f, ids, last_ts);
        frames.push_back(std::move(f));
    });
    sort_frames(frames);
    return frames;
}

std::vector<FrameRef> ingest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw Error(Errc::IoError, "cannot open manifest " + manifest_path.string());
    }
    return ingest(in);
}

std::vector<FrameRef> ManifestFollower::poll() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) {
        return {};
    }
    in.seekg(static_cast<std::streamoff>(offset_));
    std::string chunk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto last_newline = chunk.rfind('\n');
    if (last_newline == std::string::npos) {
        return {};
    }
    chunk.resize(last_newline + 1);

    // Validate the whole batch against copies so a bad line consumes nothing.
    auto ids = frame_ids_;
    auto last_ts = last_ts_;
    std::vector<FrameRef> frames;
    std::istringstream lines(chunk);
    const std::size_t base = line_;
    std::size_t consumed_lines = 0;
    jsonl::for_each_record(lines, kSchema, [&](std::size_t line, const jsonl::json& obj) {
        FrameRef f = parse_entry(base + line, obj);
        check_entry(base + line, f, ids, last_ts);
        frames.push_back(std::move(f));
    });
    consumed_lines = static_cast<std::size_t>(std::count(chunk.begin(), chunk.end(), '\n'));

    offset_ += chunk.size();
    line_ += consumed_lines;
    frame_ids_ = std::move(ids);
    last_ts_ = std::move(last_ts);
    sort_frames(frames);
    return frames;
}

}  // namespace sentinel
