#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "config.hpp"

namespace floqstab::cli {

enum ExitCode : int { ok = 0, config_error = 2, numerical_failure = 3, partial_failure = 4 };

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out = "out";
  int threads = 0;
  bool keep_going = false;
  std::optional<int> truncation_override;
  std::optional<int> steps_per_period;
  bool quiet = false;
};

std::vector<std::string> subcommands();

// applies the command-line overrides to a parsed config
void apply_overrides(RunConfig& c, const CommandOptions& o);

// runs one subcommand end to end; never throws, reports on stderr and returns the exit code
int run_command(const std::string& name, const CommandOptions& options);

}  // namespace floqstab::cli
