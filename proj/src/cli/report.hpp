#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmbias/manifest.hpp"

namespace mmbias::cli {

using Json = nlohmann::ordered_json;

std::string sha256_hex(std::span<const std::uint8_t> bytes);

// Hash of the manifest document followed by every file it references.
std::string manifest_sha256(const Manifest& manifest);

// Shortest round-trip decimal form; identical across runs.
std::string format_double(double v);
std::string format_optional(const std::optional<double>& v);

// Non-finite values become null.
Json number(double v);
Json number(const std::optional<double>& v);

// Writes `text` to `path`, throwing ConfigError when it cannot be created.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& doc);

std::string csv_field(const std::string& field);

}  // namespace mmbias::cli
