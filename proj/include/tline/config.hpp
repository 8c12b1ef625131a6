#pragma once

// Plain-text run configuration: INI-style sections of `key = value` lines,
// '#' or ';' comments. See docs/config.md for the schema.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tline/simulation.hpp"
#include "tline/stochastic.hpp"

namespace tline {

struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

struct ConfigDocument {
  std::vector<ConfigEntry> entries;
  std::filesystem::path base_dir;  // relative data files resolve against this
};

ConfigDocument parse_config_text(std::string_view text, const std::filesystem::path& base_dir = {});
ConfigDocument load_config_file(const std::filesystem::path& path);

struct StochasticSettings {
  std::optional<std::string> space_name;  // preset name; empty means `params`
  std::vector<std::string> params;        // "name" or "name:lower:upper"
  int points = 5;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  std::optional<QoIKind> qoi;
};

struct RunConfig {
  SimulationConfig sim;
  StochasticSettings stochastic;
};

/// Applies the document on top of `base` (a preset or the defaults).
/// Unknown sections or keys raise ValidationError naming them.
RunConfig apply_config(const ConfigDocument& doc, RunConfig base);

/// Resolves the random space against the effective simulation config.
RandomSpace resolve_space(const RunConfig& cfg);

/// Parses "g_c" (nominal +/- 10%) or "g_c:9000:11000".
RandomParameter parse_parameter_spec(std::string_view spec, const SimulationConfig& cfg);

/// Sorted `section.key = value` lines describing the effective config; the
/// digest hashes these, so it does not depend on how the config was written.
std::vector<std::string> canonical_lines(const RunConfig& cfg);
std::string config_digest(const RunConfig& cfg);

/// 64-bit FNV-1a, lower-case hex.
std::string fnv1a_hex(std::string_view data);

}  // namespace tline
