#pragma once

// JSON conversions shared by the document formats (model, facts, session,
// plan, reference). Kept apart from the domain headers so that only the I/O
// layers see nlohmann::json.

#include <string>
#include <string_view>

#include <json.hpp>

#include "procmatch/model.hpp"

namespace procmatch::io {

using json = nlohmann::json;

json model_to_json(const ProcessModel& model);
ModelDocument model_from_json(const json& doc);

json context_to_json(const CharacterizationVector& context);
CharacterizationVector context_from_json(const json& doc);

/// Parses text into JSON, translating parse failures into SyntaxError with
/// line and column.
json parse_json(std::string_view text);

/// Two-space indented, sorted-key dump with a trailing newline.
std::string dump(const json& doc);

// Field accessors that raise schema_error naming the field.
const json& require(const json& obj, const char* key, const std::string& where);
std::string require_string(const json& obj, const char* key, const std::string& where);
std::string optional_string(const json& obj, const char* key, const std::string& where);
double require_number(const json& obj, const char* key, const std::string& where);

} // namespace procmatch::io
