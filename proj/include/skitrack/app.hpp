#pragma once

// Command implementations behind the `skitrack` executable. Each returns a
// process exit code: 0 success, 1 partial failure, 2 invalid invocation.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skitrack/tracker.hpp"

namespace skitrack::app {

enum ExitCode : int { kSuccess = 0, kPartialFailure = 1, kInvalidInvocation = 2 };

/// Named pipeline variants: baseline and finetuned run without reattempt
/// or incremental updates (they differ only in backend weights); ours
/// enables both.
void apply_preset(const std::string& preset, TrackerConfig& config);

/// Parses "reattempt=off,itu=on" style ablation lists.
void apply_ablation(const std::string& spec, TrackerConfig& config);

nlohmann::ordered_json tracker_config_json(const TrackerConfig& config);
/// Overlays any fields present in `json` onto `config`.
void merge_tracker_config(const nlohmann::json& json, TrackerConfig& config);

struct RunConfig {
  TrackerConfig tracker;
  std::string preset;  // empty, baseline, finetuned, ours
  std::string backend = "scripted";
  std::string endpoint;
  std::string manifest;
  std::string suite;
  std::size_t variants = 100;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  int timeout_ms = 10000;
  std::filesystem::path out_dir = "out";

  /// Throws ConfigError describing the first problem.
  void validate() const;
};

/// Reads a config file (the same schema run_manifest.json is written in).
RunConfig load_run_config(const std::filesystem::path& path);
void merge_run_config(const nlohmann::json& json, RunConfig& config);
/// Resolved config, excluding the output directory.
nlohmann::ordered_json run_config_json(const RunConfig& config);

int cmd_track(const RunConfig& config, std::ostream& log);

struct EvaluateOptions {
  std::vector<std::pair<std::string, std::filesystem::path>> predictions;  // variant name, directory
  std::filesystem::path manifest;
  std::filesystem::path out_dir = "report";
};
int cmd_evaluate(const EvaluateOptions& options, std::ostream& log);

struct SimulateOptions {
  std::string suite = "all";
  std::uint64_t seed = 0;
  std::size_t variants = 100;
  std::filesystem::path out_dir = "scenarios";
};
int cmd_simulate(const SimulateOptions& options, std::ostream& log);

struct WeightsOptions {
  std::filesystem::path manifest;
  std::string counts;  // "AL=114575,FS=53389,JP=20536"
};
int cmd_weights(const WeightsOptions& options, std::ostream& out);

}  // namespace skitrack::app
