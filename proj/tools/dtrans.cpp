#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "dtrans/cli/config.hpp"
#include "dtrans/cli/runner.hpp"
#include "dtrans/errors.hpp"

namespace {

const std::vector<std::pair<std::string, std::string>> kFlags{
    {"n", "simplex dimension"},
    {"generator", "portfolio generator, e.g. power:0.5 or mix:0.5,phi0,power:0.5"},
    {"N", "comma-separated sample sizes"},
    {"lambda", "auto or a positive number"},
    {"t-grid", "number of time points"},
    {"grid", "path grid resolution"},
    {"seeds", "replicate seeds per setting"},
    {"seed", "master seed"},
    {"eps", "simplex truncation"},
    {"out", "output directory"},
    {"format", "json, csv or both"},
    {"p", "source point (cost)"},
    {"q", "target point (cost)"},
    {"atoms", "atoms per measure (interpolate)"},
    {"samples", "Monte Carlo samples (entropy)"},
    {"replicas", "replicas per size (gaps)"},
    {"n-grid", "comma-separated dimensions (gaps)"},
    {"lambdas", "comma-separated lambda grid (paths)"},
    {"particles", "particles per path (paths)"},
    {"model", "density model (entropy) or gap model (gaps)"},
    {"regularity-pairs", "pairs sampled for the regularity estimate"},
};

struct Command {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> flags;
  std::string config_file;
  std::string kind;
};

void add_flags(Command& cmd, bool with_kind) {
  for (const auto& [f, help] : kFlags) cmd.app->add_option("--" + f, cmd.flags[f], help);
  cmd.app->add_option("--config", cmd.config_file, "key=value file; flags override it");
  if (with_kind) cmd.app->add_option("--kind", cmd.kind, "experiment to check")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet optimal transport experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dtrans::cli::kVersion);

  std::vector<std::string> names = dtrans::cli::experiment_kinds();
  names.push_back("validate");
  std::map<std::string, Command> commands;
  for (const auto& name : names) {
    Command& cmd = commands[name];
    cmd.app = app.add_subcommand(name, name == "validate" ? "check a configuration without running it"
                                                          : "run the " + name + " experiment");
    add_flags(cmd, name == "validate");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dtrans::cli::kValidationFailure;
  }

  for (auto& [name, cmd] : commands) {
    if (!cmd.app->parsed()) continue;
    const std::string kind = name == "validate" ? cmd.kind : name;
    dtrans::cli::KeyValues values;
    try {
      if (!cmd.config_file.empty()) values = dtrans::cli::read_config_file(cmd.config_file);
    } catch (const dtrans::ValidationError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return dtrans::cli::kValidationFailure;
    }
    values.erase("kind");
    for (const auto& [f, help] : kFlags) {
      if (cmd.app->count("--" + f) > 0) values[f] = cmd.flags[f];
    }
    const auto parsed = dtrans::cli::parse_config(kind, values);
    if (name == "validate") {
      return dtrans::cli::validate(parsed.config, parsed.errors, std::cout, std::cerr);
    }
    if (!parsed.errors.empty()) {
      for (const auto& e : parsed.errors) std::cerr << "error: " << e << "\n";
      return dtrans::cli::kValidationFailure;
    }
    return dtrans::cli::run(parsed.config, std::cout, std::cerr);
  }
  return dtrans::cli::kValidationFailure;
}
