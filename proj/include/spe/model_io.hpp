#pragma once

#include <json.hpp>

#include <string>
#include <string_view>

#include "spe/model.hpp"

namespace spe {

inline constexpr std::string_view kModelSchema = "spe-model/1";

/// Parses a model document. Throws ParseError on malformed text and
/// SchemaError (with a JSON pointer) on structural mismatches. The result is
/// canonicalized but not validated; call validate_model for that.
SoftwareModel load_model(std::string_view document);

/// Canonical document: collections sorted by id, keys sorted, fixed indent.
std::string save_model(const SoftwareModel& model);

SoftwareModel load_model_file(const std::string& path);
void save_model_file(const SoftwareModel& model, const std::string& path);

nlohmann::json model_to_json(const SoftwareModel& model);
SoftwareModel model_from_json(const nlohmann::json& doc, const std::string& pointer = "");

nlohmann::json body_to_json(const Body& body);
Body body_from_json(const nlohmann::json& array, const std::string& pointer);

nlohmann::json validation_to_json(const ValidationReport& report);

/// Whole-file helpers shared by the other formats.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace spe
