#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <istream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "sentinel/error.hpp"
#include "sentinel/geometry.hpp"

namespace sentinel::jsonl {

using nlohmann::json;

/// Calls fn(line_number, object) for each non-blank line. Lines that are not
/// JSON objects raise SchemaError(code) with the 1-based line number.
void for_each_record(std::istream& in, Errc code,
                     const std::function<void(std::size_t, const json&)>& fn);

/// Rejects keys outside `allowed`.
void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::size_t line, Errc code);

/// Typed field accessors; missing or mistyped fields raise SchemaError(code).
std::string get_string(const json& obj, std::string_view key, std::size_t line, Errc code);
double get_number(const json& obj, std::string_view key, std::size_t line, Errc code);
std::int64_t get_integer(const json& obj, std::string_view key, std::size_t line, Errc code);

/// [x_min, y_min, x_max, y_max], validated.
BBox get_bbox(const json& obj, std::string_view key, std::size_t line, Errc code);

json bbox_to_json(const BBox& box);

}  // namespace sentinel::jsonl
