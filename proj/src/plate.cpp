#include "sentinel/plate.hpp"

#include <algorithm>
#include <numeric>

#include "sentinel/error.hpp"

namespace sentinel {

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

template <typename Pred>
std::size_t run_length(std::string_view s, std::size_t from, Pred pred) {
    std::size_t n = 0;
    while (from + n < s.size() && pred(s[from + n])) ++n;
    return n;
}

}  // namespace

CanonicalPlate canonicalize(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (c >= 'a' && c <= 'z') {
            c = static_cast<char>(c - 'a' + 'A');
        }
        if (is_upper(c) || is_digit(c)) {
            out.push_back(c);
        }
    }
    if (out.empty()) {
        throw Error(Errc::EmptyAfterNormalization,
                    "plate text is empty after normalization: '" + std::string(raw) + "'");
    }
    if (out.size() > kMaxPlateLength) {
        throw Error(Errc::TooLong, "plate text exceeds " + std::to_string(kMaxPlateLength) +
                                       " characters: '" + out + "'");
    }
    return CanonicalPlate(std::move(out));
}

CanonicalPlate CanonicalPlate::from_canonical(std::string_view text) {
    CanonicalPlate p = canonicalize(text);
    if (p.text() != text) {
        throw Error(Errc::InvalidArgument, "not a canonical plate: '" + std::string(text) + "'");
    }
    return p;
}

PlateParse parse_plate(const CanonicalPlate& plate) {
    const std::string_view s = plate.text();
    if (s.size() < 4 || !is_upper(s[0]) || !is_upper(s[1])) {
        return UnstructuredPlate{plate.text()};
    }
    const std::size_t district_max = std::min<std::size_t>(2, run_length(s, 2, is_digit));
    for (std::size_t d = district_max; d >= 1; --d) {
        const std::size_t series_start = 2 + d;
        const std::size_t series_max = std::min<std::size_t>(3, run_length(s, series_start, is_upper));
        for (std::size_t a = series_max + 1; a-- > 0;) {
            const std::size_t number_start = series_start + a;
            const std::size_t number_len = s.size() - number_start;
            if (number_len < 1 || number_len > 4) continue;
            if (run_length(s, number_start, is_digit) != number_len) continue;
            return StructuredPlate{std::string(s.substr(0, 2)),
                                   std::string(s.substr(2, d)),
                                   std::string(s.substr(series_start, a)),
                                   std::string(s.substr(number_start))};
        }
    }
    return UnstructuredPlate{plate.text()};
}

std::string serialize(const PlateParse& parse) {
    if (const auto* p = std::get_if<StructuredPlate>(&parse)) {
        return p->state_code + p->district + p->series + p->number;
    }
    return std::get<UnstructuredPlate>(parse).text;
}

namespace {

const std::vector<std::string>& default_classes() {
    static const std::vector<std::string> classes{"O0", "I1", "B8", "S5", "Z2"};
    return classes;
}

}  // namespace

ConfusableTable::ConfusableTable() : ConfusableTable(default_classes()) {}

ConfusableTable::ConfusableTable(std::span<const std::string> classes) {
    std::array<unsigned char, 256> parent{};
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](unsigned char c) {
        while (parent[c] != c) {
            parent[c] = parent[parent[c]];
            c = parent[c];
        }
        return c;
    };
    for (const auto& cls : classes) {
        for (char c : cls) {
            if (!is_upper(c) && !is_digit(c)) {
                throw Error(Errc::ConfigError,
                            "confusable class '" + cls + "' contains a non-plate character");
            }
        }
        for (std::size_t i = 1; i < cls.size(); ++i) {
            const auto ra = find(static_cast<unsigned char>(cls[0]));
            const auto rb = find(static_cast<unsigned char>(cls[i]));
            if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
    }
    for (std::size_t c = 0; c < rep_.size(); ++c) {
        rep_[c] = find(static_cast<unsigned char>(c));
    }
    classes_.assign(classes.begin(), classes.end());
}

bool ConfusableTable::equivalent(char a, char b) const noexcept {
    return rep_[static_cast<unsigned char>(a)] == rep_[static_cast<unsigned char>(b)];
}

double confusable_distance(const CanonicalPlate& a, const CanonicalPlate& b,
                           const ConfusableTable& table) {
    const std::string& s = a.text();
    const std::string& t = b.text();
    std::vector<unsigned> prev(t.size() + 1);
    std::vector<unsigned> cur(t.size() + 1);
    std::iota(prev.begin(), prev.end(), 0u);
    for (std::size_t i = 1; i <= s.size(); ++i) {
        cur[0] = static_cast<unsigned>(i);
        for (std::size_t j = 1; j <= t.size(); ++j) {
            const unsigned sub = table.equivalent(s[i - 1], t[j - 1]) ? 0u : 1u;
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + sub});
        }
        std::swap(prev, cur);
    }
    return static_cast<double>(prev[t.size()]);
}

std::string_view to_string(PlateMatchKind kind) noexcept {
    switch (kind) {
        case PlateMatchKind::Exact: return "exact";
        case PlateMatchKind::Fuzzy: return "fuzzy";
        case PlateMatchKind::None: return "none";
    }
    return "none";
}

PlateMatchDecision plate_match(const CanonicalPlate& observed,
                               std::span<const PlateWatchEntry> watchlist, double tau_plate,
                               const ConfusableTable& table) {
    if (!(tau_plate >= 0.0)) {
        throw Error(Errc::InvalidArgument, "tau_plate must be non-negative");
    }
    const PlateWatchEntry* best = nullptr;
    double best_distance = 0.0;
    for (const auto& entry : watchlist) {
        const double d = confusable_distance(observed, entry.plate, table);
        if (!best || d < best_distance) {
            best = &entry;
            best_distance = d;
            if (d == 0.0) break;
        }
    }
    if (best && best_distance == 0.0) {
        return {PlateMatchKind::Exact, 0.0, best->entry_id};
    }
    if (best && best_distance <= tau_plate) {
        return {PlateMatchKind::Fuzzy, best_distance, best->entry_id};
    }
    return {};
}

}  // namespace sentinel
