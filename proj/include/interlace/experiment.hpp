// Experiment runner behind the command-line tool: parameter validation,
// replica seeding, CSV tables and run manifests.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace interlace {

/// Invalid configuration; the message names the offending field.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(const std::string& field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct OutputFile {
  std::string name;  // file name relative to the output directory
  std::string content;
};

struct RunRecord {
  std::string command;
  nlohmann::json config;  // validated parameters with defaults filled in
  std::string config_hash;
  std::vector<std::uint64_t> replica_seeds;
  std::vector<OutputFile> outputs;
  nlohmann::json summary;  // small per-command facts for the manifest
  std::string stdout_text;
};

/// Subcommands: capacity, sample, analyze, renorm-check, estimate, resistance.
const std::vector<std::string>& experiment_commands();

/// Runs a subcommand on a parameter object (flag names without dashes,
/// dashes replaced by underscores). Outputs are returned in memory; nothing
/// is written. Throws ValidationError for bad parameters.
RunRecord run_experiment(const std::string& command, const nlohmann::json& params);

/// Manifest JSON for a finished run (adds generator name and timing).
nlohmann::json run_manifest(const RunRecord& record, double seconds);

/// Documentation of every CSV file and column.
std::string csv_schema();

/// FNV-1a hash of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

}  // namespace interlace
