// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace gclgcn {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumeric = 2 };

/// Parses argv and dispatches to a subcommand. Never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gclgcn
