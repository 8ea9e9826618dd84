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

#include "pco/scripted_backend.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pco/error.hpp"
#include "pco/text.hpp"

namespace pco {

namespace {

using nlohmann::json;

std::string fixture_error(std::size_t line, const std::string& what) {
  return "fixture line " + std::to_string(line) + ": " + what;
}

ScriptRule parse_rule(const json& j, std::size_t line) {
  if (!j.is_object()) {
    throw Error(ErrorCode::invalid_fixture, fixture_error(line, "record is not an object"));
  }
  const auto string_field = [&](const char* key, bool required) -> std::string {
    const auto it = j.find(key);
    if (it == j.end()) {
      if (required) {
        throw Error(ErrorCode::invalid_fixture,
                    fixture_error(line, std::string("missing '") + key + "'"));
      }
      return {};
    }
    if (!it->is_string()) {
      throw Error(ErrorCode::invalid_fixture,
                  fixture_error(line, std::string("'") + key + "' must be a string"));
    }
    return it->get<std::string>();
  };

  ScriptRule rule;
  const std::string role = string_field("role", true);
  const auto parsed_role = parse_role(role);
  if (!parsed_role) {
    throw Error(ErrorCode::invalid_fixture, fixture_error(line, "unknown role '" + role + "'"));
  }
  rule.role = *parsed_role;

  const std::string kind = string_field("match_kind", false);
  if (kind.empty() || kind == "substring") {
    rule.kind = MatchKind::substring;
  } else if (kind == "exact") {
    rule.kind = MatchKind::exact;
  } else if (kind == "regex") {
    rule.kind = MatchKind::regex;
  } else {
    throw Error(ErrorCode::invalid_fixture, fixture_error(line, "unknown match_kind '" + kind + "'"));
  }

  const std::string on = string_field("on", false);
  if (on.empty() || on == "user") {
    rule.field = MatchField::user;
  } else if (on == "system") {
    rule.field = MatchField::system;
  } else {
    throw Error(ErrorCode::invalid_fixture, fixture_error(line, "unknown 'on' field '" + on + "'"));
  }

  rule.pattern = string_field("pattern", false);
  rule.response = string_field("response", true);

  if (const auto it = j.find("max_uses"); it != j.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) {
      throw Error(ErrorCode::invalid_fixture,
                  fixture_error(line, "'max_uses' must be a nonnegative integer"));
    }
    rule.max_uses = it->get<std::uint64_t>();
  }
  return rule;
}

std::string substitute(const std::string& response, const ChatRequest& request) {
  std::string out = response;
  const auto replace_all = [&out](std::string_view key, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = out.find(key, pos)) != std::string::npos) {
      out.replace(pos, key.size(), value);
      pos += value.size();
    }
  };
  replace_all("{{user_content}}", request.user_content);
  replace_all("{{system_prompt}}", request.system_prompt);
  return out;
}

std::string excerpt(std::string_view s) {
  constexpr std::size_t kMax = 160;
  std::string out = text::single_line(s.substr(0, kMax));
  if (s.size() > kMax) out += "...";
  return out;
}

}  // namespace

ScriptedBackend::ScriptedBackend(std::vector<ScriptRule> rules)
    : rules_(std::move(rules)), uses_(rules_.size(), 0) {
  compiled_.reserve(rules_.size());
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (rules_[i].kind != MatchKind::regex) {
      compiled_.emplace_back();
      continue;
    }
    try {
      compiled_.emplace_back(std::regex(rules_[i].pattern, std::regex::ECMAScript));
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::invalid_fixture,
                  "rule " + std::to_string(i + 1) + ": bad regex: " + e.what());
    }
  }
}

ScriptedBackend ScriptedBackend::parse(std::string_view jsonl) {
  std::vector<ScriptRule> rules;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::invalid_fixture, fixture_error(line_no, e.what()));
    }
    rules.push_back(parse_rule(j, line_no));
  }
  try {
    return ScriptedBackend(std::move(rules));
  } catch (const Error& e) {
    throw Error(ErrorCode::invalid_fixture, std::string("fixture: ") + e.what());
  }
}

ScriptedBackend ScriptedBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::invalid_fixture, "cannot open fixture " + path.string());
  }
  const std::string data{std::istreambuf_iterator<char>(in), {}};
  return parse(data);
}

Completion ScriptedBackend::do_complete(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const ScriptRule& rule = rules_[i];
    if (rule.role != request.role) continue;
    if (rule.max_uses && uses_[i] >= *rule.max_uses) continue;
    const std::string& subject =
        rule.field == MatchField::user ? request.user_content : request.system_prompt;
    bool hit = false;
    switch (rule.kind) {
      case MatchKind::exact: hit = subject == rule.pattern; break;
      case MatchKind::substring: hit = subject.find(rule.pattern) != std::string::npos; break;
      case MatchKind::regex: hit = std::regex_search(subject, *compiled_[i]); break;
    }
    if (!hit) continue;
    ++uses_[i];
    Completion completion;
    completion.text = substitute(rule.response, request);
    completion.usage.prompt_tokens =
        text::count_words(request.system_prompt) + text::count_words(request.user_content);
    completion.usage.completion_tokens = text::count_words(completion.text);
    return completion;
  }
  throw Error(ErrorCode::fixture_miss,
              "no fixture rule for role '" + std::string(to_string(request.role)) +
                  "' and request: " + excerpt(request.user_content));
}

}  // namespace pco
