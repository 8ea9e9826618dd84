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

#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace pco {

/// Prompt text for every role. `theta_default` and `phi_default` are only
/// the starting values of the trainable policies; the critic prompt is held
/// fixed for the whole run.
struct Templates {
  std::string theta_default;   // encoder_policy
  std::string encoder_task;    // {task} {codebook_entries} {S}
  std::string phi_default;     // generator_policy
  std::string generator_task;  // {task} {active_instinct_texts}
  std::string critic_policy;
  std::string critic_task;     // {task} {active_instincts} {prompt} {model_response} {reference}
  std::string attribution_policy;
  std::string attribution_task;  // {variable} {current_text} {verdict}
  std::string updater_policy;
  std::string updater_task;      // {variable} {current_text} {critique}

  static Templates defaults();

  /// Applies file overrides keyed by template name (e.g. "critic_policy").
  /// Unknown names and unreadable files throw `invalid_config`.
  static Templates with_overrides(
      const std::map<std::string, std::filesystem::path>& overrides);

  bool operator==(const Templates&) const = default;
};

}  // namespace pco
