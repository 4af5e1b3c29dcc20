// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace defectforge::cli {

// Lets `--config` take a JSON object. Nested objects name subcommands, so
// {"seed": 3, "dataset": {"split": {"k": 5}}} sets --seed and the k option
// of `dataset split`. Arrays become repeated values.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;
};

}  // namespace defectforge::cli
