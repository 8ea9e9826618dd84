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

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "pco/error.hpp"

namespace pco {
namespace {

using nlohmann::json;

// Loopback chat-completions server whose behaviour each test scripts.
class FakeServer {
 public:
  using Handler = std::function<void(const json& body, httplib::Response&)>;

  explicit FakeServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      last_auth = req.get_header_value("Authorization");
      handler_(json::parse(req.body), res);
    });
    server_.Post("/tokenize", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"count": 17})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  std::atomic<int> requests{0};
  std::string last_auth;

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

void reply(httplib::Response& res, const std::string& text) {
  const json body = {{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}},
                     {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 3}}}};
  res.set_content(body.dump(), "application/json");
}

RemoteSettings settings_for(const FakeServer& server) {
  RemoteSettings s;
  s.defaults = {server.endpoint(), "test-model", "k3y"};
  s.backoff_base = std::chrono::milliseconds(1);
  s.timeout = std::chrono::seconds(5);
  return s;
}

ChatRequest request(GenerationParams params = GenerationParams::training(Role::target)) {
  return ChatRequest{Role::target, "system", "user", params};
}

TEST(RemoteBackend, RequestBodyCarriesParameters) {
  const json body = json::parse(RemoteBackend::request_body(request(), "m", true));
  EXPECT_EQ(body["model"], "m");
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"], "user");
  EXPECT_EQ(body["temperature"], 0.6);
  EXPECT_EQ(body["top_p"], 0.95);
  EXPECT_EQ(body["top_k"], 20);
  const json greedy =
      json::parse(RemoteBackend::request_body(request(GenerationParams::greedy(Role::target)), "m", true));
  EXPECT_EQ(greedy["temperature"], 0.0);
  EXPECT_FALSE(greedy.contains("top_k"));
  EXPECT_FALSE(json::parse(RemoteBackend::request_body(request(), "m", false)).contains("top_k"));
}

TEST(RemoteBackend, SuccessfulCallIsAccounted) {
  FakeServer server([](const json& body, httplib::Response& res) {
    reply(res, "echo " + body["messages"][1]["content"].get<std::string>());
  });
  RemoteBackend backend(settings_for(server));
  const Completion c = backend.complete(request());
  EXPECT_EQ(c.text, "echo user");
  EXPECT_EQ(c.usage.prompt_tokens, 11u);
  EXPECT_EQ(server.last_auth, "Bearer k3y");
  const auto t = backend.telemetry().snapshot();
  EXPECT_EQ(t.calls_for(Role::target), 1u);
  EXPECT_EQ(t.tokens_out[static_cast<std::size_t>(Role::target)], 3u);
}

TEST(RemoteBackend, TransientErrorsAreRetried) {
  FakeServer server([n = 0](const json&, httplib::Response& res) mutable {
    if (n++ < 2) {
      res.status = n == 1 ? 503 : 429;
      return;
    }
    reply(res, "finally");
  });
  RemoteBackend backend(settings_for(server));
  EXPECT_EQ(backend.complete(request()).text, "finally");
  EXPECT_EQ(server.requests.load(), 3);
}

TEST(RemoteBackend, ExhaustedRetriesAreBackendUnavailable) {
  FakeServer server([](const json&, httplib::Response& res) { res.status = 500; });
  RemoteBackend backend(settings_for(server));
  try {
    backend.complete(request());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::backend_unavailable);
  }
  EXPECT_EQ(server.requests.load(), 3);
  EXPECT_EQ(backend.telemetry().snapshot().total_calls(), 0u);
}

TEST(RemoteBackend, ClientErrorsAreNotRetried) {
  FakeServer server([](const json&, httplib::Response& res) {
    res.status = 401;
    res.set_content("bad key", "text/plain");
  });
  RemoteBackend backend(settings_for(server));
  EXPECT_THROW(backend.complete(request()), Error);
  EXPECT_EQ(server.requests.load(), 1);
}

TEST(RemoteBackend, RejectedTopKIsDroppedForGood) {
  FakeServer server([](const json& body, httplib::Response& res) {
    if (body.contains("top_k")) {
      res.status = 400;
      res.set_content(R"({"error": "unsupported parameter top_k"})", "application/json");
      return;
    }
    reply(res, "ok");
  });
  RemoteBackend backend(settings_for(server));
  EXPECT_EQ(backend.complete(request()).text, "ok");
  EXPECT_TRUE(backend.top_k_dropped());
  EXPECT_EQ(backend.complete(request()).text, "ok");
  EXPECT_EQ(server.requests.load(), 3);
}

TEST(RemoteBackend, UnreachableEndpoint) {
  RemoteSettings s;
  s.defaults.endpoint = "http://127.0.0.1:1/v1";
  s.max_attempts = 2;
  s.backoff_base = std::chrono::milliseconds(1);
  s.timeout = std::chrono::seconds(1);
  RemoteBackend backend(s);
  try {
    backend.complete(request());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::backend_unavailable);
  }
}

TEST(RemoteBackend, RoleOverridesRouteToTheirEndpoint) {
  FakeServer main_server([](const json&, httplib::Response& res) { reply(res, "main"); });
  FakeServer critic_server([](const json& body, httplib::Response& res) {
    reply(res, body["model"].get<std::string>());
  });
  RemoteSettings s = settings_for(main_server);
  s.role_overrides[Role::critic] = {critic_server.endpoint(), "judge", ""};
  RemoteBackend backend(s);
  EXPECT_EQ(backend.complete(request()).text, "main");
  EXPECT_EQ(backend.complete(ChatRequest{Role::critic, "s", "u", {}}).text, "judge");
  EXPECT_EQ(critic_server.last_auth, "Bearer k3y");
}

TEST(RemoteBackend, TokenCountFromServer) {
  FakeServer server([](const json&, httplib::Response& res) { reply(res, ""); });
  RemoteBackend backend(settings_for(server));
  EXPECT_EQ(backend.count_tokens("some text"), 17u);
}

TEST(RemoteBackend, ConfigurationErrors) {
  EXPECT_THROW(RemoteBackend(RemoteSettings{}), Error);
  RemoteSettings no_scheme;
  no_scheme.defaults.endpoint = "localhost:8000";
  EXPECT_THROW(RemoteBackend{no_scheme}, Error);
}

}  // namespace
}  // namespace pco
