#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

namespace bridg::toml {

// Minimal TOML reader/writer covering the subset this project's config
// files use: comments, [table] headers, dotted keys, basic and literal
// strings, integers, floats, booleans, and single-line arrays of scalars.
// Values are represented as nlohmann::json.

nlohmann::json parse(const std::string& text);
nlohmann::json parse_file(const std::string& path);

// Serializes a json object tree back to TOML. Floats always render with a
// decimal point or exponent so types survive a round-trip.
std::string serialize(const nlohmann::json& root);

// Applies a "--set a.b.c=value" override onto a parsed tree. The value
// literal is typed like a TOML scalar (bool/int/float), falling back to a
// plain string.
void set_dotted(nlohmann::json& root, const std::string& dotted_key, const std::string& value_literal);

nlohmann::json parse_scalar(const std::string& literal);

}  // namespace bridg::toml
