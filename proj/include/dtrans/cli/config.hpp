#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dtrans::cli {

inline constexpr const char* kVersion = "0.1.0";

const std::vector<std::string>& experiment_kinds();

struct ExperimentConfig {
  std::string kind;
  std::size_t n = 2;
  std::string generator = "power:0.5";
  std::vector<std::size_t> sizes{4, 6, 8, 10, 12, 14};
  std::optional<double> lambda;  // empty means automatic
  std::size_t t_grid = 33;
  std::size_t grid = 256;
  std::size_t seeds = 20;
  std::uint64_t seed = 7;
  double eps = 0.02;
  std::string out;
  std::string format = "json";
  std::vector<double> p;
  std::vector<double> q;
  std::size_t atoms = 50;
  std::size_t samples = 10000;
  std::size_t replicas = 200;
  std::vector<std::size_t> n_grid{64, 128, 256, 512, 1024, 2048, 4096};
  std::vector<double> lambdas{1e2, 1e3, 1e4};
  std::size_t particles = 50;
  std::string model;  // empty picks the kind default (entropy: uniform, gaps: linear)
  std::size_t regularity_pairs = 20000;
};

using KeyValues = std::map<std::string, std::string>;

/// Reads flat key=value text; '#' starts a comment, later keys override.
KeyValues read_config_file(const std::string& path);

/// Canonical key spelling: lower case, '_' replaced by '-'.
std::string canonical_key(const std::string& key);

struct ParseResult {
  ExperimentConfig config;
  std::vector<std::string> errors;  // one entry per offending field
};

/// Builds a config from key/value pairs, collecting every field error.
ParseResult parse_config(const std::string& kind, const KeyValues& values);

/// Field-level invariant checks that need no computation.
std::vector<std::string> check_config(const ExperimentConfig& config);

}  // namespace dtrans::cli
