#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sentinel {

inline constexpr std::size_t kMaxPlateLength = 16;

/// Uppercase [A-Z0-9] text, 1..16 characters. Only constructible through
/// canonicalize() or from_canonical().
class CanonicalPlate {
public:
    const std::string& text() const noexcept { return text_; }

    /// Accepts text that is already canonical; throws Error(SchemaError) otherwise.
    static CanonicalPlate from_canonical(std::string_view text);

    friend bool operator==(const CanonicalPlate&, const CanonicalPlate&) = default;
    friend auto operator<=>(const CanonicalPlate&, const CanonicalPlate&) = default;

private:
    explicit CanonicalPlate(std::string text) : text_(std::move(text)) {}
    friend CanonicalPlate canonicalize(std::string_view raw);

    std::string text_;
};

/// Uppercases ASCII letters and drops every byte outside [A-Z0-9].
/// Throws Error(EmptyAfterNormalization) or Error(TooLong).
CanonicalPlate canonicalize(std::string_view raw);

/// State code, district, optional series, number: MH 12 AB 1234.
struct StructuredPlate {
    std::string state_code;
    std::string district;
    std::string series;
    std::string number;

    friend bool operator==(const StructuredPlate&, const StructuredPlate&) = default;
};

struct UnstructuredPlate {
    std::string text;

    friend bool operator==(const UnstructuredPlate&, const UnstructuredPlate&) = default;
};

using PlateParse = std::variant<StructuredPlate, UnstructuredPlate>;

/// Decomposes against LL D{1,2} A{0,3} N{1,4}, preferring the longest
/// district and then the longest series that still admit a full match.
PlateParse parse_plate(const CanonicalPlate& plate);

std::string serialize(const PlateParse& parse);

/// Characters that OCR substitutes for each other at zero cost. Classes given
/// as strings ("O0", "I1", ...); overlapping classes are merged so the table
/// always describes an equivalence relation.
class ConfusableTable {
public:
    /// The default classes {O,0} {I,1} {B,8} {S,5} {Z,2}.
    ConfusableTable();
    explicit ConfusableTable(std::span<const std::string> classes);

    bool equivalent(char a, char b) const noexcept;
    const std::vector<std::string>& classes() const noexcept { return classes_; }

private:
    std::array<unsigned char, 256> rep_{};
    std::vector<std::string> classes_;
};

/// Levenshtein distance with unit insert/delete/substitute costs, except that
/// substituting within a confusable class is free.
double confusable_distance(const CanonicalPlate& a, const CanonicalPlate& b,
                           const ConfusableTable& table = ConfusableTable());

struct PlateWatchEntry {
    std::string entry_id;
    CanonicalPlate plate;
    std::string label;
};

enum class PlateMatchKind { Exact, Fuzzy, None };

std::string_view to_string(PlateMatchKind kind) noexcept;

struct PlateMatchDecision {
    PlateMatchKind kind = PlateMatchKind::None;
    double distance = 0.0;
    std::optional<std::string> matched_entry_id;

    bool hit() const noexcept { return kind != PlateMatchKind::None; }
};

inline constexpr double kDefaultTauPlate = 1.0;

/// Exact when some entry is at distance 0 (first in watchlist order), else
/// Fuzzy for the nearest entry within tau_plate (first in order on ties),
/// else None.
PlateMatchDecision plate_match(const CanonicalPlate& observed,
                               std::span<const PlateWatchEntry> watchlist,
                               double tau_plate = kDefaultTauPlate,
                               const ConfusableTable& table = ConfusableTable());

}  // namespace sentinel
