#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "silencer/io.hpp"

namespace silencer::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNonConvergence = 3 };

/// Entry point behind the `silencer` executable. argv[0] is the program name.
int dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

/// Re-executes a command from its resolved configuration and returns the
/// payload. `command` is the subcommand name recorded in the report.
nlohmann::json execute(const std::string& command, const nlohmann::json& config_echo,
                       std::vector<std::string>& warnings);

}  // namespace silencer::cli
