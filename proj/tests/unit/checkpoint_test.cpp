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

#include "pco/checkpoint.hpp"

#include <gtest/gtest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "pco/digest.hpp"
#include "pco/error.hpp"
#include "pco/run_log.hpp"
#include "support/harness.hpp"

namespace pco {
namespace {

ErrorCode parse_error(std::string_view data) {
  try {
    parse_checkpoint(data);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted";
  return ErrorCode::io;
}

Checkpoint trained_checkpoint() {
  const auto b = pcotest::load_bundle("demo");
  auto backend = pcotest::scripted(pcotest::data_dir() / "demo" / "fixture.jsonl");
  Trainer trainer(b.config.train, *backend, Templates::defaults());
  Checkpoint cp{b.config.train, trainer.initial_state()};
  trainer.train(cp.state, b.dataset, {}, 1);
  return cp;
}

TEST(Digest, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Checkpoint, RoundTripPreservesEverything) {
  Checkpoint cp = trained_checkpoint();
  cp.state.telemetry.encoder_fallbacks = 3;
  const std::string data = serialize_checkpoint(cp);
  const Checkpoint back = parse_checkpoint(data);
  EXPECT_EQ(back, cp);
  EXPECT_EQ(serialize_checkpoint(back), data);
  Rng a = cp.state.rng, b = back.state.rng;
  EXPECT_EQ(a.next(), b.next());
}

TEST(Checkpoint, FileRoundTrip) {
  pcotest::TempDir dir;
  const Checkpoint cp = trained_checkpoint();
  save_checkpoint(cp, dir / "nested" / "cp.json");
  EXPECT_EQ(load_checkpoint(dir / "nested" / "cp.json"), cp);
  EXPECT_FALSE(std::filesystem::exists(dir / "nested" / "cp.json.tmp"));
  EXPECT_THROW(load_checkpoint(dir / "missing.json"), Error);
}

TEST(Checkpoint, TruncatedOrTamperedIsIntegrityError) {
  const std::string data = serialize_checkpoint(trained_checkpoint());
  EXPECT_EQ(parse_error(data.substr(0, data.size() / 2)), ErrorCode::integrity);
  EXPECT_EQ(parse_error(""), ErrorCode::integrity);
  EXPECT_EQ(parse_error("[]"), ErrorCode::integrity);

  auto j = nlohmann::json::parse(data);
  j["payload"]["state"]["epoch"] = 40;
  EXPECT_EQ(parse_error(j.dump()), ErrorCode::integrity);

  j = nlohmann::json::parse(data);
  j["format"] = "something-else";
  EXPECT_EQ(parse_error(j.dump()), ErrorCode::integrity);
}

TEST(Checkpoint, OtherVersionIsRefused) {
  auto j = nlohmann::json::parse(serialize_checkpoint(trained_checkpoint()));
  j["version"] = 2;
  EXPECT_EQ(parse_error(j.dump()), ErrorCode::version_mismatch);
}

// A consistent checksum does not excuse an inconsistent payload.
TEST(Checkpoint, PayloadInvariantsAreChecked) {
  auto j = nlohmann::json::parse(serialize_checkpoint(trained_checkpoint()));
  j["payload"]["config"]["k"] = 8;
  j["sha256"] = sha256_hex(j["payload"].dump());
  EXPECT_EQ(parse_error(j.dump()), ErrorCode::integrity);
}

TEST(RunLog, LineRoundTrip) {
  StepRecord r;
  r.step = 12;
  r.epoch = 1;
  r.example_id = 4;
  r.route = {{3, 7, 11, 15}, RouteSource::fallback, 2};
  r.prompt = "line one\nline \"two\"";
  r.response = "ok";
  r.reward = 0.5;
  r.severity = 0.25;
  r.updated = {"phi", "instinct:7"};
  const std::string line = to_json_line(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(line.rfind("{\"step\":12,\"epoch\":1,\"example\":4,\"route\":[3,7,11,15]", 0), 0u);
  EXPECT_EQ(parse_step_record(line), r);
  r.severity.reset();
  EXPECT_EQ(parse_step_record(to_json_line(r)), r);
  EXPECT_THROW(parse_step_record("{\"step\":1}"), Error);
}

TEST(RunLog, ReadReportsLineNumbers) {
  pcotest::TempDir dir;
  StepRecord r;
  r.route = {{0}, RouteSource::exploration, 0};
  std::ofstream(dir / "log.jsonl") << to_json_line(r) << "\n" << "garbage\n";
  try {
    read_run_log(dir / "log.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::integrity);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
}

}  // namespace
}  // namespace pco
