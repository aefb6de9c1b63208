#pragma once

// Executes a RunConfig and writes its CSV tables and JSON sidecar.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace ionjc {

inline constexpr const char* kVersion = "0.1.0";

struct RunResult {
  std::vector<std::filesystem::path> csv_files;
  std::filesystem::path sidecar;
  nlohmann::json summary;  // the sidecar contents
};

/// Runs `config` and writes <out_dir>/<stem>.csv (or one grid CSV per
/// snapshot for pfunction) plus <out_dir>/<stem>.json.
RunResult run(const RunConfig& config, const std::filesystem::path& out_dir);

/// {"status": "error", "kind": ..., "message": ...}
nlohmann::json error_json(const std::exception& e);

}  // namespace ionjc
