#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "distinct/kernel.hpp"

namespace distinct {

// Exit codes: 0 the command ran (the statistical decision lives in the
// report), 1 runtime failure (I/O, malformed data, invalid parameters),
// 2 usage error (unknown flag, missing argument, unknown group label).
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs `distinct <command> [flags]`; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Parses --bandwidth values: median | fixed:<sigma> | scaled:<multiplier>.
KernelSpec parse_kernel(const std::string& family, const std::string& bandwidth);

}  // namespace distinct
