// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/cli/app.hpp"

int main(int argc, char** argv) { return defectforge::cli::run(argc, argv); }
