#pragma once

// Plot-ready result files: comma-separated tables and a JSON run manifest.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace tline {

struct Column {
  std::string name;
  std::span<const double> values;
};

/// One row per index of the longest column; shorter columns leave empty cells.
/// Numbers use "%.12g" and non-finite values are written as "nan".
std::string format_csv(const std::vector<Column>& columns);
void write_csv(const std::filesystem::path& path, const std::vector<Column>& columns);

std::string format_number(double v);

struct RunManifest {
  std::string run_id;
  std::string command;
  std::string status = "running";  // running | completed | failed
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> files;
  nlohmann::json details = nlohmann::json::object();
  std::optional<std::string> error;
};

nlohmann::json to_json(const RunManifest& m);

/// Writes <dir>/manifest.json, replacing any earlier manifest.
void write_manifest(const std::filesystem::path& dir, const RunManifest& m);

/// UTC, ISO 8601 to the second.
std::string utc_timestamp();

}  // namespace tline
