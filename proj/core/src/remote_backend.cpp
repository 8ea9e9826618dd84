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

#include "pco/remote_backend.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "pco/error.hpp"

namespace pco {

namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // base path without trailing slash
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::invalid_config, "endpoint '" + url + "' has no scheme");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

bool is_transient(int status) {
  return status == 408 || status == 429 || status >= 500;
}

std::unique_ptr<httplib::Client> make_client(const ParsedUrl& url,
                                             const EndpointSettings& endpoint,
                                             std::chrono::seconds timeout) {
  auto client = std::make_unique<httplib::Client>(url.origin);
  client->set_connection_timeout(timeout);
  client->set_read_timeout(timeout);
  client->set_write_timeout(timeout);
  if (!endpoint.api_key.empty()) client->set_bearer_token_auth(endpoint.api_key);
  return client;
}

}  // namespace

RemoteSettings RemoteSettings::from_env() {
  RemoteSettings s;
  s.defaults.endpoint = env_or_empty("PCO_ENDPOINT");
  s.defaults.model = env_or_empty("PCO_MODEL");
  s.defaults.api_key = env_or_empty("PCO_API_KEY");
  return s;
}

RemoteBackend::RemoteBackend(RemoteSettings settings) : settings_(std::move(settings)) {
  if (settings_.defaults.endpoint.empty()) {
    throw Error(ErrorCode::invalid_config,
                "remote backend needs an endpoint (config 'endpoint' or PCO_ENDPOINT)");
  }
  if (settings_.max_attempts < 1) {
    throw Error(ErrorCode::invalid_config, "max_attempts must be at least 1");
  }
  parse_url(settings_.defaults.endpoint);
  for (const auto& [role, endpoint] : settings_.role_overrides) {
    if (!endpoint.endpoint.empty()) parse_url(endpoint.endpoint);
  }
}

const EndpointSettings& RemoteBackend::settings_for(Role role) const {
  const auto it = settings_.role_overrides.find(role);
  return it == settings_.role_overrides.end() ? settings_.defaults : it->second;
}

std::string RemoteBackend::request_body(const ChatRequest& request,
                                        std::string_view model, bool include_top_k) {
  json body;
  body["model"] = model;
  body["messages"] = json::array({
      {{"role", "system"}, {"content", request.system_prompt}},
      {{"role", "user"}, {"content", request.user_content}},
  });
  body["temperature"] = request.params.temperature;
  body["top_p"] = request.params.top_p;
  if (include_top_k && request.params.top_k) body["top_k"] = *request.params.top_k;
  body["max_tokens"] = request.params.max_tokens;
  if (request.params.seed) body["seed"] = *request.params.seed;
  body["stream"] = false;
  return body.dump();
}

Completion RemoteBackend::do_complete(const ChatRequest& request) {
  EndpointSettings endpoint = settings_for(request.role);
  if (endpoint.endpoint.empty()) endpoint.endpoint = settings_.defaults.endpoint;
  if (endpoint.model.empty()) endpoint.model = settings_.defaults.model;
  if (endpoint.api_key.empty()) endpoint.api_key = settings_.defaults.api_key;

  const ParsedUrl url = parse_url(endpoint.endpoint);
  auto client = make_client(url, endpoint, settings_.timeout);
  const std::string path = url.path + "/chat/completions";

  std::string last_error;
  auto backoff = settings_.backoff_base;
  for (int attempt = 1; attempt <= settings_.max_attempts; ++attempt) {
    const std::string body = request_body(request, endpoint.model, !drop_top_k_.load());
    auto result = client->Post(path, body, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
    } else if (result->status == 200) {
      try {
        const json j = json::parse(result->body);
        Completion completion;
        const json& content = j.at("choices").at(0).at("message").at("content");
        completion.text = content.is_null() ? std::string() : content.get<std::string>();
        if (const auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
          completion.usage.prompt_tokens = usage->value("prompt_tokens", std::uint64_t{0});
          completion.usage.completion_tokens =
              usage->value("completion_tokens", std::uint64_t{0});
        }
        return completion;
      } catch (const json::exception& e) {
        throw Error(ErrorCode::backend_unavailable,
                    std::string("malformed chat-completions response: ") + e.what());
      }
    } else if (result->status == 400 && !drop_top_k_.load() && request.params.top_k &&
               result->body.find("top_k") != std::string::npos) {
      if (!drop_top_k_.exchange(true)) {
        spdlog::warn("endpoint rejected top_k; sending requests without it");
      }
      --attempt;  // not a transport fault
      continue;
    } else if (is_transient(result->status)) {
      last_error = "HTTP " + std::to_string(result->status);
    } else {
      throw Error(ErrorCode::backend_unavailable,
                  "HTTP " + std::to_string(result->status) + ": " + result->body.substr(0, 200));
    }
    if (attempt < settings_.max_attempts) {
      spdlog::warn("{} call failed ({}); retrying in {} ms", to_string(request.role),
                   last_error, backoff.count());
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw Error(ErrorCode::backend_unavailable,
              std::string(to_string(request.role)) + " call failed after " +
                  std::to_string(settings_.max_attempts) + " attempts: " + last_error);
}

std::optional<std::uint64_t> RemoteBackend::count_tokens(std::string_view text) {
  const ParsedUrl url = parse_url(settings_.defaults.endpoint);
  auto client = make_client(url, settings_.defaults, settings_.timeout);
  json body;
  body["model"] = settings_.defaults.model;
  body["prompt"] = text;
  // vLLM and llama.cpp servers expose /tokenize at the server root.
  auto result = client->Post("/tokenize", body.dump(), "application/json");
  if (!result || result->status != 200) return std::nullopt;
  try {
    const json j = json::parse(result->body);
    if (const auto it = j.find("count"); it != j.end() && it->is_number_unsigned()) {
      return it->get<std::uint64_t>();
    }
    if (const auto it = j.find("tokens"); it != j.end() && it->is_array()) {
      return it->size();
    }
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

}  // namespace pco
