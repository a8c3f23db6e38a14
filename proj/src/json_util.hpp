#pragma once

// Helpers for reading the structured-text formats. Every accessor reports
// failures as SchemaError with a JSON pointer to the offending value.

#include <json.hpp>

#include <string>
#include <string_view>

#include "spe/error.hpp"

namespace spe::detail {

using Json = nlohmann::json;

/// Parses `text`, converting nlohmann byte offsets to line/column.
Json parse_document(std::string_view text);

/// Canonical serialization: sorted keys, two-space indent, trailing newline.
std::string dump_document(const Json& doc);

std::string child(const std::string& pointer, std::string_view key);
std::string child(const std::string& pointer, std::size_t index);

const Json& field(const Json& obj, const std::string& pointer, std::string_view key);
const Json* optional_field(const Json& obj, std::string_view key);

std::string get_string(const Json& obj, const std::string& pointer, std::string_view key);
double get_number(const Json& obj, const std::string& pointer, std::string_view key);
long long get_integer(const Json& obj, const std::string& pointer, std::string_view key);
bool get_bool(const Json& obj, const std::string& pointer, std::string_view key, bool fallback);
const Json& get_array(const Json& obj, const std::string& pointer, std::string_view key);
const Json& get_object(const Json& obj, const std::string& pointer, std::string_view key);

void expect_object(const Json& j, const std::string& pointer);
void expect_schema(const Json& doc, std::string_view schema);

}  // namespace spe::detail
