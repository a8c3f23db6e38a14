#include "json_util.hpp"

#include <algorithm>

namespace spe::detail {

Json parse_document(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    // nlohmann reports a 1-based byte offset of the last byte read.
    std::size_t offset = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    if (auto pos = what.find("parse error"); pos != std::string::npos) what = what.substr(pos);
    throw ParseError(what, line, column);
  }
}

std::string dump_document(const Json& doc) { return doc.dump(2) + "\n"; }

namespace {

// RFC 6901 escaping.
std::string escape(std::string_view token) {
  std::string out;
  for (char c : token) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

}  // namespace

std::string child(const std::string& pointer, std::string_view key) {
  return pointer + "/" + escape(key);
}

std::string child(const std::string& pointer, std::size_t index) {
  return pointer + "/" + std::to_string(index);
}

void expect_object(const Json& j, const std::string& pointer) {
  if (!j.is_object()) throw SchemaError(pointer, "expected an object");
}

const Json& field(const Json& obj, const std::string& pointer, std::string_view key) {
  expect_object(obj, pointer);
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw SchemaError(child(pointer, key), "missing required field");
  return *it;
}

const Json* optional_field(const Json& obj, std::string_view key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(std::string(key));
  return it == obj.end() ? nullptr : &*it;
}

std::string get_string(const Json& obj, const std::string& pointer, std::string_view key) {
  const Json& v = field(obj, pointer, key);
  if (!v.is_string()) throw SchemaError(child(pointer, key), "expected a string");
  return v.get<std::string>();
}

double get_number(const Json& obj, const std::string& pointer, std::string_view key) {
  const Json& v = field(obj, pointer, key);
  if (!v.is_number()) throw SchemaError(child(pointer, key), "expected a number");
  return v.get<double>();
}

long long get_integer(const Json& obj, const std::string& pointer, std::string_view key) {
  const Json& v = field(obj, pointer, key);
  if (!v.is_number_integer()) throw SchemaError(child(pointer, key), "expected an integer");
  return v.get<long long>();
}

bool get_bool(const Json& obj, const std::string& pointer, std::string_view key, bool fallback) {
  const Json* v = optional_field(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw SchemaError(child(pointer, key), "expected a boolean");
  return v->get<bool>();
}

const Json& get_array(const Json& obj, const std::string& pointer, std::string_view key) {
  const Json& v = field(obj, pointer, key);
  if (!v.is_array()) throw SchemaError(child(pointer, key), "expected an array");
  return v;
}

const Json& get_object(const Json& obj, const std::string& pointer, std::string_view key) {
  const Json& v = field(obj, pointer, key);
  if (!v.is_object()) throw SchemaError(child(pointer, key), "expected an object");
  return v;
}

void expect_schema(const Json& doc, std::string_view schema) {
  const std::string found = get_string(doc, "", "schema");
  if (found != schema)
    throw SchemaError("/schema", "expected schema '" + std::string(schema) + "', found '" + found + "'");
}

}  // namespace spe::detail
