#include "tline/output.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "tline/errors.hpp"

namespace tline {

std::string format_number(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string format_csv(const std::vector<Column>& columns) {
  std::string out;
  std::size_t rows = 0;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out += (c ? "," : "") + columns[c].name;
    rows = std::max(rows, columns[c].values.size());
  }
  out += '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      if (r < columns[c].values.size()) out += format_number(columns[c].values[r]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<Column>& columns) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path.string(), "out");
  f << format_csv(columns);
  if (!f) throw ValidationError("write failed for " + path.string(), "out");
}

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json j;
  j["run_id"] = m.run_id;
  j["command"] = m.command;
  j["status"] = m.status;
  j["config_digest"] = m.config_digest;
  j["seed"] = m.seed;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["files"] = m.files;
  j["details"] = m.details;
  if (m.error) j["error"] = *m.error;
  return j;
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  const auto path = dir / "manifest.json";
  const auto tmp = dir / "manifest.json.tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + path.string(), "out");
    f << to_json(m).dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace tline
