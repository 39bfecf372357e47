#include "sentinel/jsonl.hpp"

#include <algorithm>
#include <cmath>

namespace sentinel::jsonl {

namespace {

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n';
    });
}

const json& field(const json& obj, std::string_view key, std::size_t line, Errc code) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError(code, line, "missing field '" + std::string(key) + "'");
    }
    return *it;
}

}  // namespace

void for_each_record(std::istream& in, Errc code,
                     const std::function<void(std::size_t, const json&)>& fn) {
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text)) {
            continue;
        }
        json obj = json::parse(text, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            throw SchemaError(code, line, "record is not a JSON object");
        }
        fn(line, obj);
    }
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::size_t line, Errc code) {
    for (const auto& item : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw SchemaError(code, line, "unknown field '" + item.key() + "'");
        }
    }
}

std::string get_string(const json& obj, std::string_view key, std::size_t line, Errc code) {
    const json& v = field(obj, key, line, code);
    if (!v.is_string()) {
        throw SchemaError(code, line, "field '" + std::string(key) + "' must be a string");
    }
    return v.get<std::string>();
}

double get_number(const json& obj, std::string_view key, std::size_t line, Errc code) {
    const json& v = field(obj, key, line, code);
    if (!v.is_number()) {
        throw SchemaError(code, line, "field '" + std::string(key) + "' must be a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw SchemaError(code, line, "field '" + std::string(key) + "' must be finite");
    }
    return d;
}

std::int64_t get_integer(const json& obj, std::string_view key, std::size_t line, Errc code) {
    const json& v = field(obj, key, line, code);
    if (!v.is_number_integer()) {
        throw SchemaError(code, line, "field '" + std::string(key) + "' must be an integer");
    }
    return v.get<std::int64_t>();
}

BBox get_bbox(const json& obj, std::string_view key, std::size_t line, Errc code) {
    const json& v = field(obj, key, line, code);
    if (!v.is_array() || v.size() != 4 ||
        !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
        throw SchemaError(code, line, "field '" + std::string(key) + "' must be [x_min, y_min, x_max, y_max]");
    }
    BBox box{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
    if (!box.valid()) {
        throw SchemaError(code, line, "invalid box: need finite coordinates with min <= max");
    }
    return box;
}

json bbox_to_json(const BBox& box) {
    return json::array({box.x_min, box.y_min, box.x_max, box.y_max});
}

}  // namespace sentinel::jsonl
