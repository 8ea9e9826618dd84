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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pco/backend.hpp"
#include "pco/codebook.hpp"
#include "pco/templates.hpp"

namespace pco {

/// The two trainable policy prompts. The codebook is the third trainable.
struct Trainables {
  std::string theta;  // encoder system prompt (routing policy)
  std::string phi;    // generator system prompt (composition policy)
  std::uint64_t theta_revision = 0;
  std::uint64_t phi_revision = 0;

  static Trainables from_templates(const Templates& templates);

  bool operator==(const Trainables&) const = default;
};

/// Names one trainable variable: phi, theta, or one codebook slot.
struct VariableId {
  enum class Kind { phi, theta, instinct };

  Kind kind = Kind::phi;
  std::size_t instinct = 0;

  static VariableId phi_var() { return {Kind::phi, 0}; }
  static VariableId theta_var() { return {Kind::theta, 0}; }
  static VariableId instinct_var(std::size_t k) { return {Kind::instinct, k}; }

  std::string to_string() const;           // "phi", "theta", "instinct:3"
  static VariableId parse(std::string_view s);

  bool operator==(const VariableId&) const = default;
};

enum class TargetKind { generator, routing, instinct, unattributed };

struct Finding {
  TargetKind target = TargetKind::unattributed;
  std::size_t instinct = 0;  // meaningful for TargetKind::instinct
  std::string description;

  bool matches(const VariableId& variable) const;
  bool operator==(const Finding&) const = default;
};

/// Parsed critic output. Invariant: no findings implies severity 0.
struct Verdict {
  double severity = 0.0;
  std::vector<Finding> findings;
  std::string raw;
  bool degraded = false;  // critic ignored the SEVERITY/FINDING protocol

  bool operator==(const Verdict&) const = default;
};

struct TextGradient {
  VariableId variable;
  std::string critique;  // empty: no update for this variable
  bool from_attribution_call = false;
};

/// Scalar penalty of a verdict; zero for an empty critique.
double scalarize(const Verdict& verdict);

/// Extracts every integer in `completion` ("3, 20, 13, 25", "pick 1 and 2").
/// Returns nullopt when there is none. Values too large for `long long` are
/// saturated so that range validation rejects them.
std::optional<std::vector<long long>> parse_encoder_output(
    std::string_view completion);

/// Total parser for the critic protocol:
///   SEVERITY: <0..1>
///   FINDING[GENERATOR|ROUTING|INSTINCT:<k>|GENERAL]: <description>
/// Text without a SEVERITY marker yields a degraded verdict (severity 0.5,
/// one unattributed finding wrapping the text). Instinct targets outside
/// [0, k) are treated as unattributed.
Verdict parse_verdict(std::string_view text, std::size_t k);

/// "k: text (sr=0.123)" lines for the encoder prompt.
std::string render_codebook_entries(const Codebook& codebook);

enum class Phase { training, inference };

/// The five LLM roles bound to one backend and template set.
class Roles {
 public:
  Roles(Backend& backend, Templates templates)
      : backend_(backend), templates_(std::move(templates)) {}

  const Templates& templates() const { return templates_; }
  Backend& backend() { return backend_; }

  /// Candidate route for `input`; validation happens in choose_route.
  std::optional<std::vector<long long>> encode(std::string_view input,
                                               const Codebook& codebook,
                                               std::string_view theta,
                                               std::size_t s, Phase phase);

  /// Composes the per-instance prompt. Throws `generation_failure` on an
  /// empty completion.
  std::string generate_prompt(std::string_view input,
                              std::span<const std::string> instinct_texts,
                              std::string_view phi, Phase phase);

  /// The single call to the frozen target model.
  std::string execute_target(std::string_view prompt, std::string_view input,
                             Phase phase);

  /// Throws `critic_failure` on an empty completion.
  Verdict critique(std::string_view response, std::string_view input,
                   std::string_view prompt, std::string_view reference,
                   std::span<const std::size_t> active,
                   const Codebook& codebook);

  /// Scopes the verdict to one variable. Findings already aimed at the
  /// variable are used directly; otherwise unattributed findings are sent
  /// through one attribution call. Backend failures give an empty gradient.
  TextGradient attribute(const Verdict& verdict, const VariableId& variable,
                         std::string_view current_text);

  /// Revised text, or `current_text` when the updater returns nothing or the
  /// backend fails.
  std::string apply_textgrad(const VariableId& variable,
                             std::string_view current_text,
                             const TextGradient& gradient);

 private:
  Backend& backend_;
  Templates templates_;
};

std::string describe_variable(const VariableId& variable);

}  // namespace pco
