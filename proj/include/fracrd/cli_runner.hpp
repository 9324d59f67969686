#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fracrd/config.hpp"
#include "fracrd/report_io.hpp"

namespace fracrd {

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "FRACRD_OUT";

struct Check {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double limit = 0.0;
};

struct RunManifest {
  std::string name;
  std::uint64_t seed = 0;
  std::string config_sha256;
  /// "completed", "blowup", or "none" when nothing was simulated.
  std::string run_status = "none";
  std::vector<Check> checks;
  /// Scalar results in report order; sweep tables are built from these.
  std::vector<std::pair<std::string, double>> summary;
  std::vector<Artifact> artifacts;
  std::filesystem::path directory;

  bool passed() const;
  nlohmann::ordered_json to_json() const;
};

/// Validates the config, runs the simulation and every requested report,
/// and writes config.json, CSV reports, checkpoints and manifest.json under
/// `directory`. Throws ConfigInvalid or ModelUnknown before any compute,
/// OutputUnwritable when the directory cannot be written.
RunManifest run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& directory);

struct SweepTable {
  std::string axis;
  std::vector<double> values;
  std::vector<std::string> columns;
  /// rows[k][c] is summary column c of the run at values[k] (NaN if absent).
  std::vector<std::vector<double>> rows;
  std::vector<RunManifest> runs;

  bool passed() const;
};

/// One run per value in `directory/<axis>=<value>`, up to `threads` at a time,
/// plus sweep.csv and manifest.json in `directory`. Every value is validated
/// before the first run. Throws UnknownAxis, EmptyValues, ConfigInvalid.
SweepTable sweep(const ScenarioConfig& cfg, const std::string& axis, const std::vector<double>& values,
                 const std::filesystem::path& directory, int threads = 1);

/// kernel, inequalities, ladder, bimolecular.
std::vector<std::string> suite_names();
/// Bundled scenarios of a suite. Throws InvalidArgument for unknown names.
std::vector<ScenarioConfig> suite_scenarios(const std::string& suite, std::uint64_t seed);

struct SuiteResult {
  std::string suite;
  std::vector<RunManifest> runs;

  bool passed() const;
};

/// Runs each scenario in `directory/<scenario name>` and writes summary.csv
/// (one row per check) and manifest.json in `directory`.
SuiteResult run_suite(const std::string& suite, std::uint64_t seed, const std::filesystem::path& directory,
                      int threads = 1);

/// $FRACRD_OUT when set and non-empty, otherwise "fracrd-out".
std::filesystem::path default_output_root();

/// 0 when every check passed, 2 otherwise.
int exit_status(bool passed);

}  // namespace fracrd
