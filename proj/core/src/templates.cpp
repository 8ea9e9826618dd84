// Copyright 2026 The PCO Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pco/templates.hpp"

#include <fstream>
#include <iterator>
#include <string_view>

#include "pco/error.hpp"

namespace pco {

namespace {

#include "pco/default_templates.inc"

std::string strip_final_newline(std::string_view s) {
  if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
  return std::string(s);
}

std::string* slot(Templates& t, const std::string& name) {
  if (name == "encoder_policy") return &t.theta_default;
  if (name == "encoder_task") return &t.encoder_task;
  if (name == "generator_policy") return &t.phi_default;
  if (name == "generator_task") return &t.generator_task;
  if (name == "critic_policy") return &t.critic_policy;
  if (name == "critic_task") return &t.critic_task;
  if (name == "attribution_policy") return &t.attribution_policy;
  if (name == "attribution_task") return &t.attribution_task;
  if (name == "updater_policy") return &t.updater_policy;
  if (name == "updater_task") return &t.updater_task;
  return nullptr;
}

}  // namespace

Templates Templates::defaults() {
  Templates t;
  t.theta_default = strip_final_newline(k_encoder_policy);
  t.encoder_task = strip_final_newline(k_encoder_task);
  t.phi_default = strip_final_newline(k_generator_policy);
  t.generator_task = strip_final_newline(k_generator_task);
  t.critic_policy = strip_final_newline(k_critic_policy);
  t.critic_task = strip_final_newline(k_critic_task);
  t.attribution_policy = strip_final_newline(k_attribution_policy);
  t.attribution_task = strip_final_newline(k_attribution_task);
  t.updater_policy = strip_final_newline(k_updater_policy);
  t.updater_task = strip_final_newline(k_updater_task);
  return t;
}

Templates Templates::with_overrides(
    const std::map<std::string, std::filesystem::path>& overrides) {
  Templates t = defaults();
  for (const auto& [name, path] : overrides) {
    std::string* target = slot(t, name);
    if (!target) {
      throw Error(ErrorCode::invalid_config, "unknown template '" + name + "'");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw Error(ErrorCode::invalid_config,
                  "template '" + name + "': cannot read " + path.string());
    }
    std::string content{std::istreambuf_iterator<char>(in), {}};
    content = strip_final_newline(content);
    if (content.empty()) {
      throw Error(ErrorCode::invalid_config, "template '" + name + "' is empty");
    }
    *target = std::move(content);
  }
  return t;
}

}  // namespace pco
