// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hintcoach::coach {

/// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitAwaitingModel = 3;

/// Runs the `hintcoach` command line (arguments exclude the program name). Errors are reported as a
/// single `error: code=<code> message="<text>"` line on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hintcoach::coach
