#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtrans/cli/config.hpp"

namespace dtrans::cli {

enum ExitCode : int { kSuccess = 0, kValidationFailure = 2, kNumericalFailure = 3 };

struct CsvTable {
  std::string file;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct Artifacts {
  nlohmann::json payload;
  std::vector<CsvTable> tables;
  std::string summary;  // short human-readable result for stdout
};

/// Executes one experiment without touching the file system.
Artifacts execute(const ExperimentConfig& config);

/// Full document: config echo, version, seed and payload.
nlohmann::json make_document(const ExperimentConfig& config, const nlohmann::json& payload);

/// Runs, writes artifacts under config.out and maps failures to exit codes.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Checks without running; prints the derived lambda schedule when relevant.
int validate(const ExperimentConfig& config, const std::vector<std::string>& parse_errors,
             std::ostream& out, std::ostream& err);

nlohmann::json config_to_json(const ExperimentConfig& config);

}  // namespace dtrans::cli
