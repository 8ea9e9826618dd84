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

#include "pco/backend.hpp"

#include <string>

#include "pco/error.hpp"

namespace pco {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::encoder: return "encoder";
    case Role::generator: return "generator";
    case Role::target: return "target";
    case Role::critic: return "critic";
    case Role::attribution: return "attribution";
    case Role::updater: return "updater";
  }
  return "unknown";
}

std::optional<Role> parse_role(std::string_view name) {
  for (Role role : kAllRoles) {
    if (to_string(role) == name) return role;
  }
  return std::nullopt;
}

int default_max_tokens(Role role) {
  switch (role) {
    case Role::encoder: return 64;
    case Role::target: return 2048;
    case Role::generator:
    case Role::critic:
    case Role::attribution:
    case Role::updater: return 1024;
  }
  return 1024;
}

GenerationParams GenerationParams::training(Role role) {
  GenerationParams p;
  p.temperature = 0.6;
  p.top_p = 0.95;
  p.top_k = 20;
  p.max_tokens = default_max_tokens(role);
  return p;
}

GenerationParams GenerationParams::greedy(Role role) {
  GenerationParams p;
  p.temperature = 0.0;
  p.top_p = 1.0;
  p.top_k = std::nullopt;
  p.max_tokens = default_max_tokens(role);
  return p;
}

std::uint64_t TelemetryCounts::total_calls() const {
  std::uint64_t total = 0;
  for (std::uint64_t c : calls) total += c;
  return total;
}

TelemetryCounts& TelemetryCounts::operator+=(const TelemetryCounts& other) {
  for (std::size_t i = 0; i < calls.size(); ++i) {
    calls[i] += other.calls[i];
    tokens_in[i] += other.tokens_in[i];
    tokens_out[i] += other.tokens_out[i];
  }
  encoder_fallbacks += other.encoder_fallbacks;
  degraded_verdicts += other.degraded_verdicts;
  skipped_steps += other.skipped_steps;
  return *this;
}

TelemetryCounts& TelemetryCounts::operator-=(const TelemetryCounts& other) {
  for (std::size_t i = 0; i < calls.size(); ++i) {
    calls[i] -= other.calls[i];
    tokens_in[i] -= other.tokens_in[i];
    tokens_out[i] -= other.tokens_out[i];
  }
  encoder_fallbacks -= other.encoder_fallbacks;
  degraded_verdicts -= other.degraded_verdicts;
  skipped_steps -= other.skipped_steps;
  return *this;
}

void Telemetry::record_call(Role role, const TokenUsage& usage) {
  const auto i = static_cast<std::size_t>(role);
  std::lock_guard lock(mutex_);
  ++counts_.calls[i];
  counts_.tokens_in[i] += usage.prompt_tokens;
  counts_.tokens_out[i] += usage.completion_tokens;
}

void Telemetry::record_encoder_fallback() {
  std::lock_guard lock(mutex_);
  ++counts_.encoder_fallbacks;
}

void Telemetry::record_degraded_verdict() {
  std::lock_guard lock(mutex_);
  ++counts_.degraded_verdicts;
}

void Telemetry::record_skipped_step() {
  std::lock_guard lock(mutex_);
  ++counts_.skipped_steps;
}

TelemetryCounts Telemetry::snapshot() const {
  std::lock_guard lock(mutex_);
  return counts_;
}

Completion Backend::complete(const ChatRequest& request) {
  if (request.system_prompt.empty() || request.user_content.empty()) {
    throw Error(ErrorCode::invalid_request,
                std::string(to_string(request.role)) +
                    " request needs a system prompt and user content");
  }
  Completion completion = do_complete(request);
  telemetry_.record_call(request.role, completion.usage);
  return completion;
}

std::optional<std::uint64_t> Backend::count_tokens(std::string_view) {
  return std::nullopt;
}

}  // namespace pco
