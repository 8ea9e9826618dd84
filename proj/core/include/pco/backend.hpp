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

#include <array>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace pco {

/// Every LLM call the engine makes is tagged with one of these roles.
enum class Role { encoder, generator, target, critic, attribution, updater };

inline constexpr std::array<Role, 6> kAllRoles = {
    Role::encoder, Role::generator,   Role::target,
    Role::critic,  Role::attribution, Role::updater};

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view name);

struct GenerationParams {
  double temperature = 0.6;
  double top_p = 0.95;
  std::optional<int> top_k = 20;  // nullopt = unlimited
  int max_tokens = 1024;
  std::optional<std::uint64_t> seed;

  /// Sampling settings used while training.
  static GenerationParams training(Role role);
  /// Greedy decoding used at evaluation and inference.
  static GenerationParams greedy(Role role);

  bool is_greedy() const { return temperature == 0.0; }

  bool operator==(const GenerationParams&) const = default;
};

int default_max_tokens(Role role);

struct ChatRequest {
  Role role = Role::target;
  std::string system_prompt;
  std::string user_content;
  GenerationParams params;
};

struct TokenUsage {
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
};

struct Completion {
  std::string text;
  TokenUsage usage;
};

/// Plain counters; the thread-safe accumulator is `Telemetry`.
struct TelemetryCounts {
  std::array<std::uint64_t, kAllRoles.size()> calls{};
  std::array<std::uint64_t, kAllRoles.size()> tokens_in{};
  std::array<std::uint64_t, kAllRoles.size()> tokens_out{};
  std::uint64_t encoder_fallbacks = 0;
  std::uint64_t degraded_verdicts = 0;
  std::uint64_t skipped_steps = 0;

  std::uint64_t calls_for(Role role) const {
    return calls[static_cast<std::size_t>(role)];
  }
  std::uint64_t total_calls() const;

  TelemetryCounts& operator+=(const TelemetryCounts& other);
  TelemetryCounts& operator-=(const TelemetryCounts& other);
  bool operator==(const TelemetryCounts&) const = default;
};

class Telemetry {
 public:
  void record_call(Role role, const TokenUsage& usage);
  void record_encoder_fallback();
  void record_degraded_verdict();
  void record_skipped_step();
  TelemetryCounts snapshot() const;

 private:
  mutable std::mutex mutex_;
  TelemetryCounts counts_;
};

/// Gateway for one model deployment. `complete` validates the request,
/// dispatches to the concrete transport and accounts the call.
/// Implementations must be safe to call from several threads.
class Backend {
 public:
  virtual ~Backend() = default;

  Completion complete(const ChatRequest& request);

  /// Exact token count of `text` when the deployment can report it.
  virtual std::optional<std::uint64_t> count_tokens(std::string_view text);

  Telemetry& telemetry() { return telemetry_; }
  const Telemetry& telemetry() const { return telemetry_; }

 protected:
  virtual Completion do_complete(const ChatRequest& request) = 0;

 private:
  Telemetry telemetry_;
};

}  // namespace pco
