#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppbound/cli/config.hpp"
#include "ppbound/cli/report.hpp"

namespace ppbound::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAcceptanceFailed = 2;

/// Software version baked in at build time.
std::string version();

struct RunOptions {
  /// Worker count; affects wall time only.
  std::size_t threads = 1;
  bool dump_points = false;
};

struct RunResult {
  int exit_code = kExitOk;
  nlohmann::json report;
  std::vector<AcceptanceCheck> checks;
  /// Artifact file names relative to the output directory.
  std::vector<std::string> files;
};

/// Runs the experiment, writes report.json, manifest.json and the CSV
/// artifacts into config.out and returns exit 0, or 2 if an acceptance check
/// failed. Errors propagate as exceptions (exit 1 at the command line).
RunResult run(const RunConfig& config, const RunOptions& options = {});

/// Runs the experiment without touching the filesystem. `csv` receives the
/// artifacts as (file name, contents) pairs.
RunResult execute(const RunConfig& config, const RunOptions& options,
                  std::vector<std::pair<std::string, std::string>>& csv);

/// Reads a point dump (`replicate,x1..xd,y` with header) holding a single
/// replicate. Throws DataError on malformed rows or mixed replicates.
ProcessSample read_points_csv(const std::string& path, std::size_t dim, double n, double c);

}  // namespace ppbound::cli
