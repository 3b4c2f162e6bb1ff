#pragma once

#include <functional>
#include <string>
#include <vector>

namespace extdep::cli {

// Parses arguments (plus an optional --config file) and runs one command.
// Returns the process exit code.
int run(int argc, char** argv);

// Appends settings from the --config file that are not given as flags.
// Exposed for testing; `lookup` tells whether the subcommand knows a key
// and whether it is a flag.
struct ConfigOption {
  bool known = false;
  bool is_flag = false;
};
std::vector<std::string> merge_config_file(const std::vector<std::string>& args, const std::string& text,
                                           const std::function<ConfigOption(const std::string&)>& lookup);

}  // namespace extdep::cli
