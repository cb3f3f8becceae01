#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "config.hpp"

namespace raman::cli {

struct OutputFile {
  std::string name;
  std::string content;
};

struct RunContext {
  Config config = Config::defaults();
  std::uint64_t seed = 1;
  unsigned workers = 0;
  bool svg = false;
};

using Command = std::function<std::vector<OutputFile>(const RunContext&)>;

/// Subcommand name -> implementation, in help order.
struct CommandInfo {
  std::string name;
  std::string help;
  Command run;
};

const std::vector<CommandInfo>& commands();

/// Checks every config value the commands read; throws config errors.
void validate_config(const Config& config);

}  // namespace raman::cli
