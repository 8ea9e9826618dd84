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

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "pco/backend.hpp"

namespace pco {

enum class MatchKind { exact, substring, regex };
enum class MatchField { user, system };

/// One fixture rule. Rules are tried in file order; the first rule whose
/// role and matcher accept the request answers it. A rule with `max_uses`
/// stops matching once it has answered that many requests.
///
/// The response may contain `{{user_content}}` or `{{system_prompt}}`, which
/// are replaced with the corresponding request text.
struct ScriptRule {
  Role role = Role::target;
  MatchKind kind = MatchKind::substring;
  MatchField field = MatchField::user;
  std::string pattern;
  std::string response;
  std::optional<std::uint64_t> max_uses;
};

/// Deterministic offline backend driven by a line-delimited fixture.
///
/// Fixture records are JSON objects with keys `role`, `match_kind`
/// (exact | substring | regex), `pattern`, `response` and optionally
/// `max_uses` and `on` (user | system, default user). Blank lines are skipped.
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::vector<ScriptRule> rules);

  static ScriptedBackend load(const std::filesystem::path& path);
  static ScriptedBackend parse(std::string_view jsonl);

  const std::vector<ScriptRule>& rules() const { return rules_; }

 protected:
  Completion do_complete(const ChatRequest& request) override;

 private:
  std::vector<ScriptRule> rules_;
  std::vector<std::optional<std::regex>> compiled_;
  std::vector<std::uint64_t> uses_;
  std::mutex mutex_;
};

}  // namespace pco
