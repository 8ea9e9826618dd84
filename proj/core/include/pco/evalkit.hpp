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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pco/backend.hpp"
#include "pco/codebook.hpp"
#include "pco/run_log.hpp"

namespace pco {

enum class RewardKind { exact_match, normalized_contains, constraint_satisfaction };

std::string_view to_string(RewardKind kind);
RewardKind parse_reward_kind(std::string_view name);

struct NormalizeOptions {
  bool case_fold = true;
  bool collapse_whitespace = true;

  bool operator==(const NormalizeOptions&) const = default;
};

struct RewardSpec {
  RewardKind kind = RewardKind::exact_match;
  NormalizeOptions options;

  bool operator==(const RewardSpec&) const = default;
};

/// Declarative output check. Text form is `kind[:argument]`, e.g.
/// `max_words:5`, `contains:yes`, `all_lowercase`.
struct Constraint {
  enum class Kind {
    max_words,
    min_words,
    contains,
    not_contains,
    paragraph_count,
    all_lowercase,
    all_uppercase,
  };

  Kind kind = Kind::max_words;
  std::size_t count = 0;  // word / paragraph bound
  std::string text;       // contains / not_contains needle

  /// Throws `invalid_spec` for unknown kinds or malformed arguments.
  static Constraint parse(std::string_view spec);
  std::string to_string() const;

  bool operator==(const Constraint&) const = default;
};

std::string normalize(std::string_view s, const NormalizeOptions& options);

bool check_constraint(const Constraint& constraint, std::string_view response,
                      const NormalizeOptions& options);

/// Task reward in [0, 1]. An empty constraint list scores 1.
double reward(const RewardSpec& spec, std::string_view response,
              std::string_view reference,
              std::span<const Constraint> constraints);

enum class TokenCountMode { approx, backend };

std::string_view to_string(TokenCountMode mode);
TokenCountMode parse_token_count_mode(std::string_view name);

/// ceil(words * 4 / 3); a tokenizer-free estimate.
std::uint64_t approx_token_length(std::string_view prompt);

/// Backend mode asks the deployment for an exact count and falls back to the
/// approximation (with a warning) when it cannot answer.
std::uint64_t prompt_token_length(std::string_view prompt, TokenCountMode mode,
                                  Backend* backend = nullptr);

struct InstinctRow {
  std::size_t index = 0;
  std::string text;
  std::uint64_t usage = 0;
  double sr = 0.0;
};

struct EpochReward {
  std::size_t epoch = 0;
  std::size_t steps = 0;
  double mean_reward = 0.0;
};

struct RunSummary {
  std::size_t steps = 0;
  std::uint64_t max_prompt_tokens = 0;
  double mean_prompt_tokens = 0.0;
  UtilizationStats routing;
  std::vector<InstinctRow> instincts;  // sorted by sr, descending
  std::vector<EpochReward> reward_curve;
};

/// Routing counts come from the log; success rates from the codebook.
RunSummary summarize(std::span<const StepRecord> log, const Codebook& codebook,
                     TokenCountMode mode = TokenCountMode::approx,
                     Backend* backend = nullptr);

std::string summary_json(const RunSummary& summary);
std::string summary_table(const RunSummary& summary);

}  // namespace pco
