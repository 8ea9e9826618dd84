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

#include "pco/config.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "pco/dataset.hpp"
#include "pco/error.hpp"

namespace pco {
namespace {

std::string error_of(std::string_view json) {
  try {
    parse_engine_config(json);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_config);
    return e.what();
  }
  ADD_FAILURE() << "accepted " << json;
  return {};
}

// Clears the endpoint variables for the duration of a test.
class ConfigTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (const char* v : {"PCO_ENDPOINT", "PCO_MODEL", "PCO_API_KEY"}) ::unsetenv(v);
  }
  void TearDown() override { SetUp(); }
};

TEST_F(ConfigTest, EmptyObjectGivesDefaults) {
  const EngineConfig c = parse_engine_config("{}");
  EXPECT_EQ(c.train, TrainConfig{});
  EXPECT_EQ(c.backend, BackendKind::remote);
  EXPECT_EQ(c.max_attempts, 3);
  EXPECT_EQ(c.backoff_ms, 1000);
}

TEST_F(ConfigTest, ParsesHyperparametersAndAblations) {
  const EngineConfig c = parse_engine_config(R"({
    "k": 8, "s": 3, "alpha": 0.2, "tau": 1.0, "epsilon0": 0.9, "gamma": 0.5,
    "epsilon_min": 0.1, "epochs": 4, "batch_size": 2, "seed": 11,
    "update_policy": "always", "no_textgrad": true, "uniform_sampling": true,
    "reward": "constraint_satisfaction", "case_fold": false, "skip_threshold": 0.5
  })");
  EXPECT_EQ(c.train.k, 8u);
  EXPECT_EQ(c.train.s, 3u);
  EXPECT_EQ(c.train.alpha, 0.2);
  EXPECT_EQ(c.train.seed, 11u);
  EXPECT_EQ(c.train.update_policy, UpdatePolicy::always);
  EXPECT_TRUE(c.train.ablations.no_textgrad);
  EXPECT_TRUE(c.train.ablations.uniform_sampling);
  EXPECT_FALSE(c.train.ablations.no_encoder);
  EXPECT_EQ(c.train.reward.kind, RewardKind::constraint_satisfaction);
  EXPECT_FALSE(c.train.reward.options.case_fold);
  EXPECT_EQ(c.train.skip_threshold, 0.5);
}

TEST_F(ConfigTest, EveryProblemIsReported) {
  const std::string msg = error_of(R"({"k": 0, "colour": "red", "alpha": "high"})");
  EXPECT_NE(msg.find("colour: unknown key"), std::string::npos) << msg;
  EXPECT_NE(msg.find("alpha"), std::string::npos) << msg;
  EXPECT_NE(msg.find("problem(s)"), std::string::npos) << msg;
}

TEST_F(ConfigTest, RejectsBadValues) {
  error_of("[1, 2]");
  error_of("{not json");
  error_of(R"({"s": 20})");
  error_of(R"({"backend": "carrier-pigeon"})");
  error_of(R"({"backend": "scripted"})");
  error_of(R"({"template_mystery": "x.txt"})");
  error_of(R"({"oracle_model": "m"})");
  error_of(R"({"max_attempts": 0})");
  error_of(R"({"init": "expert", "seed_texts": ["a", "b"]})");
}

TEST_F(ConfigTest, RelativePathsResolveAgainstConfigDir) {
  const EngineConfig c = parse_engine_config(
      R"({"backend": "scripted", "fixture": "f.jsonl", "dataset": "/abs/d.jsonl", "out": "runs"})",
      "/base");
  EXPECT_EQ(c.fixture, std::filesystem::path("/base/f.jsonl"));
  EXPECT_EQ(c.dataset, std::filesystem::path("/abs/d.jsonl"));
  EXPECT_EQ(c.out, std::filesystem::path("/base/runs"));
}

TEST_F(ConfigTest, EndpointPrecedence) {
  ::setenv("PCO_ENDPOINT", "http://env:1/v1", 1);
  ::setenv("PCO_MODEL", "env-model", 1);
  ::setenv("PCO_API_KEY", "secret", 1);
  const EngineConfig from_env = parse_engine_config("{}");
  EXPECT_EQ(from_env.endpoint.endpoint, "http://env:1/v1");
  EXPECT_EQ(from_env.endpoint.api_key, "secret");
  const EngineConfig from_file =
      parse_engine_config(R"({"endpoint": "http://file:2/v1", "critic_model": "judge"})");
  EXPECT_EQ(from_file.endpoint.endpoint, "http://file:2/v1");
  EXPECT_EQ(from_file.endpoint.model, "env-model");
  EXPECT_EQ(from_file.role_endpoints.at(Role::critic).model, "judge");
  const std::string echo = engine_config_json(from_file);
  EXPECT_EQ(echo.find("secret"), std::string::npos);
  EXPECT_NE(echo.find("http://file:2/v1"), std::string::npos);
}

TEST_F(ConfigTest, OverridesWinOverFile) {
  EngineConfig c = parse_engine_config(R"({"epochs": 9, "seed": 1, "k": 8})");
  ConfigOverrides o;
  o.epochs = 1;
  o.seed = 7;
  o.no_encoder = true;
  o.fixture = "/tmp/fixture.jsonl";
  apply_overrides(c, o);
  EXPECT_EQ(c.train.epochs, 1u);
  EXPECT_EQ(c.train.seed, 7u);
  EXPECT_EQ(c.train.k, 8u);
  EXPECT_TRUE(c.train.ablations.no_encoder);
  EXPECT_EQ(c.backend, BackendKind::scripted);

  ConfigOverrides bad;
  bad.s = 9;
  EXPECT_THROW(apply_overrides(c, bad), Error);
  ConfigOverrides bad_policy;
  bad_policy.update_policy = "sometimes";
  EXPECT_THROW(apply_overrides(c, bad_policy), Error);
}

TEST_F(ConfigTest, TrainConfigJsonRoundTrips) {
  TrainConfig t;
  t.k = 6;
  t.s = 2;
  t.seed = 123456789012345ULL;
  t.init = InitStrategy::expert_seeded;
  t.seed_texts = {"a", "b", "c", "d", "e", "f"};
  t.ablations.no_epsilon_greedy = true;
  t.reward.kind = RewardKind::normalized_contains;
  EXPECT_EQ(parse_train_config_json(train_config_json(t)), t);
}

TEST(Dataset, ParsesRecords) {
  const auto d = parse_dataset(
      "{\"input\": \"q1\", \"reference\": \"a1\"}\n\n"
      "{\"input\": \"q2\", \"constraints\": [\"max_words:5\", \"contains:yes\"], \"id\": 7}\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].reference, "a1");
  EXPECT_EQ(d[1].constraints.size(), 2u);
}

TEST(Dataset, ErrorsNameTheLine) {
  const auto line_of = [](std::string_view jsonl) -> std::string {
    try {
      parse_dataset(jsonl);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::invalid_dataset);
      return e.what();
    }
    return "accepted";
  };
  EXPECT_NE(line_of("{\"input\":\"a\",\"reference\":\"b\"}\n{\"input\":\"\"}").find("line 2"),
            std::string::npos);
  EXPECT_NE(line_of("{\"input\":\"a\"}").find("reference or constraints"), std::string::npos);
  EXPECT_NE(line_of("{\"input\":\"a\",\"ref\":\"b\"}").find("unknown field"), std::string::npos);
  EXPECT_NE(line_of("{\"input\":\"a\",\"constraints\":[\"rhymes\"]}").find("line 1"),
            std::string::npos);
  EXPECT_NE(line_of("\n\n").find("empty"), std::string::npos);
  EXPECT_THROW(load_dataset("/nonexistent.jsonl"), Error);
}

}  // namespace
}  // namespace pco
