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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pco/checkpoint.hpp"
#include "pco/digest.hpp"
#include "support/harness.hpp"

namespace {

namespace fs = std::filesystem;
using pcotest::run_cli;

std::string demo(std::string_view file) { return (pcotest::data_dir() / "demo" / file).string(); }

pcotest::CliResult simulate(const fs::path& out, std::vector<std::string> extra = {}) {
  std::vector<std::string> args{"simulate", "-q",         "--config", demo("config.json"),
                                "--fixture", demo("fixture.jsonl"), "--out",    out.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  return run_cli(args);
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST(Cli, MissingConfigFileIsReported) {
  const auto r = run_cli({"train", "--config", "/nonexistent/config.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error [io]"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("/nonexistent/config.json"), std::string::npos);
}

TEST(Cli, UsageErrorsExitNonzero) {
  EXPECT_NE(run_cli({"train"}).code, 0);
  EXPECT_NE(run_cli({"frobnicate"}).code, 0);
  EXPECT_NE(run_cli({"simulate", "--config", demo("config.json")}).code, 0);
}

TEST(Cli, HelpListsSubcommands) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* cmd : {"train", "simulate", "infer", "inspect", "report", "export"}) {
    EXPECT_NE(r.out.find(cmd), std::string::npos) << cmd;
  }
}

TEST(Cli, OverridesReachTheCheckpoint) {
  pcotest::TempDir tmp;
  const auto r = simulate(tmp.path(), {"--epochs", "1", "--seed", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("effective config:"), std::string::npos);
  const auto cp = pco::load_checkpoint(tmp / "checkpoint.json");
  EXPECT_EQ(cp.config.seed, 7u);
  EXPECT_EQ(cp.config.epochs, 1u);
  EXPECT_EQ(cp.state.epoch, 1u);
  EXPECT_TRUE(fs::exists(tmp / "checkpoints" / "epoch-000.json"));
  EXPECT_TRUE(fs::exists(tmp / "checkpoints" / "epoch-001.json"));
  EXPECT_TRUE(fs::exists(tmp / "report.json"));
  const auto effective = nlohmann::json::parse(std::ifstream(tmp / "config.json"));
  EXPECT_EQ(effective.at("seed"), 7);
  EXPECT_EQ(effective.at("backend"), "scripted");
}

TEST(Cli, SeedChangesTheTrajectory) {
  pcotest::TempDir a, b, c;
  ASSERT_EQ(simulate(a.path(), {"--seed", "7"}).code, 0);
  ASSERT_EQ(simulate(b.path(), {"--seed", "7"}).code, 0);
  ASSERT_EQ(simulate(c.path(), {"--seed", "8"}).code, 0);
  EXPECT_EQ(pco::sha256_file(a / "run_log.jsonl"), pco::sha256_file(b / "run_log.jsonl"));
  EXPECT_NE(pco::sha256_file(a / "run_log.jsonl"), pco::sha256_file(c / "run_log.jsonl"));
}

TEST(Cli, SimulatePrintsTheLogDigest) {
  pcotest::TempDir tmp;
  const auto r = simulate(tmp.path());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("run-log sha256 " + pco::sha256_file(tmp / "run_log.jsonl")),
            std::string::npos);
}

TEST(Cli, ResumeRejectsAForeignCheckpoint) {
  pcotest::TempDir tmp;
  ASSERT_EQ(simulate(tmp.path(), {"--epochs", "1"}).code, 0);
  const auto r = simulate(tmp / "other",
                          {"--seed", "99", "--resume", (tmp / "checkpoint.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error [invalid-config]"), std::string::npos) << r.err;
}

TEST(Cli, InspectSortsRows) {
  pcotest::TempDir tmp;
  ASSERT_EQ(simulate(tmp.path()).code, 0);
  const std::string ckpt = (tmp / "checkpoint.json").string();

  const auto by_id = lines(run_cli({"inspect", "--checkpoint", ckpt, "--sort", "id"}).out);
  ASSERT_EQ(by_id.size(), 17u);
  EXPECT_EQ(by_id[0], "  ID  Usage(n)   sr(%)  Instinct");
  for (std::size_t i = 1; i < by_id.size(); ++i) {
    EXPECT_EQ(std::stoul(by_id[i].substr(0, 4)), i - 1);
  }

  const auto column = [](const std::string& row, std::size_t from, std::size_t len) {
    return std::stod(row.substr(from, len));
  };
  const auto by_usage = lines(run_cli({"inspect", "--checkpoint", ckpt, "--sort", "usage"}).out);
  for (std::size_t i = 2; i < by_usage.size(); ++i) {
    EXPECT_GE(column(by_usage[i - 1], 6, 8), column(by_usage[i], 6, 8));
  }
  const auto by_sr = lines(run_cli({"inspect", "--checkpoint", ckpt}).out);
  for (std::size_t i = 2; i < by_sr.size(); ++i) {
    EXPECT_GE(column(by_sr[i - 1], 16, 6), column(by_sr[i], 16, 6));
  }
  EXPECT_NE(run_cli({"inspect", "--checkpoint", ckpt, "--sort", "colour"}).code, 0);
}

TEST(Cli, ExportAndReport) {
  pcotest::TempDir tmp;
  ASSERT_EQ(simulate(tmp.path()).code, 0);
  const std::string ckpt = (tmp / "checkpoint.json").string();
  const auto exported = run_cli({"export", "--checkpoint", ckpt});
  ASSERT_EQ(exported.code, 0);
  EXPECT_EQ(lines(exported.out).size(), 16u);
  ASSERT_EQ(run_cli({"export", "--checkpoint", ckpt, "--output", (tmp / "cb.jsonl").string()}).code, 0);
  EXPECT_TRUE(fs::exists(tmp / "cb.jsonl"));

  const auto report = run_cli({"report", "--run", tmp.path().string()});
  ASSERT_EQ(report.code, 0) << report.err;
  EXPECT_NE(report.out.find("MeanReward"), std::string::npos);
  const auto summary = nlohmann::json::parse(std::ifstream(tmp / "report.json"));
  EXPECT_EQ(summary.at("steps"), 30);
}

TEST(Cli, InferSingleAndBatch) {
  pcotest::TempDir tmp;
  ASSERT_EQ(simulate(tmp.path()).code, 0);
  const std::string ckpt = (tmp / "checkpoint.json").string();
  const auto single = run_cli({"infer", "--checkpoint", ckpt, "--fixture", demo("fixture.jsonl"),
                               "--input", "[alpha] What is 2 + 3?"});
  ASSERT_EQ(single.code, 0) << single.err;
  const auto j = nlohmann::json::parse(single.out);
  EXPECT_EQ(j.at("response"), "5");
  EXPECT_EQ(j.at("route"), nlohmann::json::array({1, 3, 5, 7}));

  const auto serial = run_cli({"infer", "--checkpoint", ckpt, "--fixture", demo("fixture.jsonl"),
                               "--dataset", demo("dataset.jsonl")});
  const auto parallel = run_cli({"infer", "--checkpoint", ckpt, "--fixture", demo("fixture.jsonl"),
                                 "--dataset", demo("dataset.jsonl"), "--jobs", "4"});
  ASSERT_EQ(serial.code, 0) << serial.err;
  EXPECT_EQ(lines(serial.out).size(), 10u);
  EXPECT_EQ(serial.out, parallel.out);

  EXPECT_EQ(run_cli({"infer", "--checkpoint", ckpt, "--fixture", demo("fixture.jsonl")}).code, 1);
}

}  // namespace
