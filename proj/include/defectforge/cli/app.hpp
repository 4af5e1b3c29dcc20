// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace defectforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

/// Runs the `defectforge` command line. Returns 0 on success, 1 on a runtime
/// failure and 2 on a configuration or usage error; failures also print a
/// one-line JSON error record on stderr.
int run(int argc, const char* const* argv);

/// Same, with the arguments after the program name.
int run(const std::vector<std::string>& args);

}  // namespace defectforge::cli
