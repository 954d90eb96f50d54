#pragma once

#include <filesystem>

#include "CLI11.hpp"
#include "json.hpp"

namespace udepth::cli {

/// Parses a JSON object from disk; throws std::invalid_argument when the
/// file is missing or malformed.
nlohmann::json load_config(const std::filesystem::path& path);

/// Feeds every key of `config` to the option of the same long name
/// ("max-dt" -> --max-dt) unless that option was given on the command line.
/// Arrays become multiple values; booleans drive flags. Unknown keys throw
/// std::invalid_argument.
void apply_config(CLI::App& command, const nlohmann::json& config);

}  // namespace udepth::cli
