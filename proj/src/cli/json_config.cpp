// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/cli/json_config.hpp"

#include <istream>
#include <iterator>

#include "json.hpp"

namespace defectforge::cli {

namespace {

using json = nlohmann::ordered_json;

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

void flatten(const json& obj, std::vector<std::string>& parents,
             std::vector<CLI::ConfigItem>& out) {
  for (const auto& [key, value] : obj.items()) {
    if (value.is_object()) {
      parents.push_back(key);
      flatten(value, parents, out);
      parents.pop_back();
      continue;
    }
    CLI::ConfigItem item;
    item.parents = parents;
    item.name = key;
    if (value.is_array()) {
      for (const auto& v : value) {
        if (v.is_structured())
          throw CLI::ConfigError("config key '" + item.fullname() + "' nests too deeply");
        item.inputs.push_back(scalar_text(v));
      }
    } else {
      item.inputs.push_back(scalar_text(value));
    }
    out.push_back(std::move(item));
  }
}

json option_value(const CLI::Option* opt, bool default_also) {
  std::vector<std::string> values = opt->results();
  if (values.empty() && default_also && !opt->get_default_str().empty())
    values.push_back(opt->get_default_str());
  if (values.empty()) return nullptr;
  if (opt->get_expected_max() > 1 && values.size() >= 1) {
    json arr = json::array();
    for (const auto& v : values) arr.push_back(v);
    return arr;
  }
  if (opt->get_type_size() == 0) return values.back() != "false" && values.back() != "0";
  return values.back();
}

json app_config(const CLI::App* app, bool default_also) {
  json j = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    json v = option_value(opt, default_also);
    if (!v.is_null()) j[name] = std::move(v);
  }
  for (const CLI::App* sub : app->get_subcommands({}))
    if (sub->parsed()) j[sub->get_name()] = app_config(sub, default_also);
  return j;
}

}  // namespace

std::string JsonConfig::to_config(const CLI::App* app, bool default_also, bool,
                                  std::string) const {
  return app_config(app, default_also).dump();
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  const std::string text{std::istreambuf_iterator<char>(input), std::istreambuf_iterator<char>()};
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CLI::ConfigError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw CLI::ConfigError("config file must hold a JSON object");
  std::vector<CLI::ConfigItem> items;
  std::vector<std::string> parents;
  flatten(root, parents, items);
  return items;
}

}  // namespace defectforge::cli
