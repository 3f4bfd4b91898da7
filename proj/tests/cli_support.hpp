// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

namespace ledcal::testing {

inline std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

/// Runs the ledcal binary with `args`, silencing its output into `log`.
/// Returns the process exit code, or -1 if it did not exit normally.
inline int run_cli(const std::string& args, const std::filesystem::path& log) {
    const std::string cmd = std::string("'") + LEDCAL_CLI + "' " + args + " > " + quoted(log) + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
}

}  // namespace ledcal::testing
