#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sphparvi/sampler.hpp"

namespace sphparvi {

/// Builds a RunConfig from its JSON form. Absent fields take their defaults,
/// unknown keys are rejected, and every error names the offending key.
/// Required: mode, target, M, T. `d` is inferred from the target when absent;
/// the proposal defaults to a standard normal in d dimensions.
RunConfig config_from_json(const nlohmann::json& j);

/// Full JSON form with every default written out; config_from_json inverts it.
nlohmann::json config_to_json(const RunConfig& cfg);

/// Applies `a.b.c=value` overrides to raw config JSON. The value is read as
/// JSON when it parses (numbers, booleans, arrays) and as a string otherwise.
void apply_overrides(nlohmann::json& j, const std::vector<std::string>& overrides);

/// Reads, overrides and validates a config file.
RunConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace sphparvi
