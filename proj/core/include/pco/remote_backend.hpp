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

#include <atomic>
#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "pco/backend.hpp"

namespace pco {

struct EndpointSettings {
  std::string endpoint;  // e.g. http://localhost:8000/v1
  std::string model;
  std::string api_key;
};

struct RemoteSettings {
  EndpointSettings defaults;
  std::map<Role, EndpointSettings> role_overrides;
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{1000};  // doubles per retry
  std::chrono::seconds timeout{120};

  /// Reads PCO_ENDPOINT, PCO_MODEL and PCO_API_KEY.
  static RemoteSettings from_env();
};

/// Client for an OpenAI-style chat-completions endpoint.
///
/// Transport errors and 408/429/5xx responses are retried with exponential
/// backoff; once attempts are exhausted the call fails with
/// `backend_unavailable`. If the endpoint rejects `top_k`, the field is
/// dropped for the rest of the client's lifetime after a single warning.
class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(RemoteSettings settings);

  /// Request body as sent on the wire.
  static std::string request_body(const ChatRequest& request,
                                  std::string_view model, bool include_top_k);

  std::optional<std::uint64_t> count_tokens(std::string_view text) override;

  bool top_k_dropped() const { return drop_top_k_.load(); }

 protected:
  Completion do_complete(const ChatRequest& request) override;

 private:
  const EndpointSettings& settings_for(Role role) const;

  RemoteSettings settings_;
  std::atomic<bool> drop_top_k_{false};
};

}  // namespace pco
