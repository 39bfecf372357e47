#include "sentinel/watchlist.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <fcntl.h>
#include <unistd.h>

#include "sentinel/error.hpp"

namespace sentinel {

using nlohmann::json;

std::vector<PlateWatchEntry> effective_plate_watchlist(const Watchlist& watchlist) {
    std::vector<PlateWatchEntry> out = watchlist.plates;
    for (const auto& face : watchlist.faces) {
        for (const auto& plate : face.linked_plates) {
            out.push_back({face.entry_id, plate, "linked:" + face.person_name});
        }
    }
    return out;
}

json to_json(const PlateWatchEntry& e) {
    return {{"id", e.entry_id}, {"plate", e.plate.text()}, {"label", e.label}};
}

json to_json(const GalleryEntry& e) {
    json linked = json::array();
    for (const auto& p : e.linked_plates) linked.push_back(p.text());
    const auto values = e.embedding.values();
    return {{"id", e.entry_id},
            {"person_name", e.person_name},
            {"embedding", std::vector<double>(values.begin(), values.end())},
            {"linked_plates", std::move(linked)}};
}

json to_json(const Watchlist& w) {
    json plates = json::array();
    for (const auto& p : w.plates) plates.push_back(to_json(p));
    json faces = json::array();
    for (const auto& f : w.faces) faces.push_back(to_json(f));
    return {{"version", 1}, {"next_id", w.next_id}, {"plates", plates}, {"faces", faces}};
}

Watchlist watchlist_from_json(const json& doc, std::size_t embedding_dim) {
    try {
        if (doc.at("version").get<int>() != 1) {
            throw Error(Errc::SchemaError, "unsupported watchlist version");
        }
        Watchlist w;
        w.next_id = doc.at("next_id").get<std::uint64_t>();
        for (const auto& p : doc.at("plates")) {
            w.plates.push_back({p.at("id").get<std::string>(),
                                CanonicalPlate::from_canonical(p.at("plate").get<std::string>()),
                                p.value("label", std::string{})});
        }
        for (const auto& f : doc.at("faces")) {
            GalleryEntry e;
            e.entry_id = f.at("id").get<std::string>();
            e.person_name = f.at("person_name").get<std::string>();
            e.embedding = Embedding(f.at("embedding").get<std::vector<double>>());
            if (e.embedding.dim() != embedding_dim) {
                throw Error(Errc::DimensionMismatch,
                            "face entry " + e.entry_id + " has a " +
                                std::to_string(e.embedding.dim()) + "-d embedding, expected " +
                                std::to_string(embedding_dim));
            }
            for (const auto& lp : f.at("linked_plates")) {
                e.linked_plates.push_back(CanonicalPlate::from_canonical(lp.get<std::string>()));
            }
            w.faces.push_back(std::move(e));
        }
        return w;
    } catch (const json::exception& e) {
        throw Error(Errc::SchemaError, std::string("malformed watchlist: ") + e.what());
    } catch (const Error& e) {
        throw Error(Errc::SchemaError, std::string("malformed watchlist: ") + e.what());
    }
}

Watchlist load_watchlist(const std::filesystem::path& path, std::size_t embedding_dim) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::IoError, "cannot open watchlist " + path.string());
    }
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        throw Error(Errc::SchemaError, "watchlist " + path.string() + " is not valid JSON");
    }
    return watchlist_from_json(doc, embedding_dim);
}

void save_watchlist_atomic(const std::filesystem::path& path, const Watchlist& watchlist) {
    const std::string body = to_json(watchlist).dump(2) + "\n";
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());

    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) {
        throw Error(Errc::IoError, "cannot create " + tmp.string());
    }
    std::size_t written = 0;
    while (written < body.size()) {
        const auto n = ::write(fd, body.data() + written, body.size() - written);
        if (n <= 0) {
            ::close(fd);
            std::filesystem::remove(tmp);
            throw Error(Errc::IoError, "write failed for " + tmp.string());
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        std::filesystem::remove(tmp);
        throw Error(Errc::IoError, "fsync failed for " + tmp.string());
    }
    ::close(fd);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error(Errc::IoError, "cannot replace " + path.string() + ": " + ec.message());
    }
}

WatchlistStore::WatchlistStore(std::filesystem::path path, std::size_t embedding_dim)
    : path_(std::move(path)), embedding_dim_(embedding_dim) {
    if (!path_.empty() && std::filesystem::exists(path_)) {
        current_ = std::make_shared<const Watchlist>(load_watchlist(path_, embedding_dim_));
    } else {
        current_ = std::make_shared<const Watchlist>();
    }
}

std::shared_ptr<const Watchlist> WatchlistStore::snapshot() const {
    std::lock_guard lock(mutex_);
    return current_;
}

void WatchlistStore::publish(std::shared_ptr<const Watchlist> next) {
    if (!path_.empty()) {
        save_watchlist_atomic(path_, *next);
    }
    std::lock_guard lock(mutex_);
    current_ = std::move(next);
}

PlateWatchEntry WatchlistStore::add_plate(std::string_view raw_plate, std::string label) {
    CanonicalPlate plate = canonicalize(raw_plate);
    std::lock_guard write(write_mutex_);
    auto next = std::make_shared<Watchlist>(*snapshot());
    const bool duplicate = std::any_of(next->plates.begin(), next->plates.end(),
                                       [&](const PlateWatchEntry& e) { return e.plate == plate; });
    if (duplicate) {
        throw Error(Errc::Conflict, "plate " + plate.text() + " is already on the watchlist");
    }
    PlateWatchEntry entry{"P" + std::to_string(next->next_id++), std::move(plate), std::move(label)};
    next->plates.push_back(entry);
    publish(std::move(next));
    return entry;
}

GalleryEntry WatchlistStore::add_face(std::string person_name, std::vector<double> embedding,
                                      const std::vector<std::string>& linked_plates) {
    if (person_name.empty()) {
        throw Error(Errc::InvalidArgument, "person_name must be non-empty");
    }
    if (embedding.size() != embedding_dim_) {
        throw Error(Errc::DimensionMismatch, "embedding has " + std::to_string(embedding.size()) +
                                                 " values, expected " +
                                                 std::to_string(embedding_dim_));
    }
    GalleryEntry entry;
    entry.person_name = std::move(person_name);
    entry.embedding = Embedding(std::move(embedding));
    for (const auto& raw : linked_plates) {
        entry.linked_plates.push_back(canonicalize(raw));
    }
    std::lock_guard write(write_mutex_);
    auto next = std::make_shared<Watchlist>(*snapshot());
    entry.entry_id = "F" + std::to_string(next->next_id++);
    next->faces.push_back(entry);
    publish(std::move(next));
    return entry;
}

bool WatchlistStore::remove_plate(const std::string& entry_id) {
    std::lock_guard write(write_mutex_);
    auto next = std::make_shared<Watchlist>(*snapshot());
    const auto removed = std::erase_if(next->plates, [&](const PlateWatchEntry& e) {
        return e.entry_id == entry_id;
    });
    if (removed == 0) return false;
    publish(std::move(next));
    return true;
}

bool WatchlistStore::remove_face(const std::string& entry_id) {
    std::lock_guard write(write_mutex_);
    auto next = std::make_shared<Watchlist>(*snapshot());
    const auto removed = std::erase_if(next->faces, [&](const GalleryEntry& e) {
        return e.entry_id == entry_id;
    });
    if (removed == 0) return false;
    publish(std::move(next));
    return true;
}

}  // namespace sentinel
