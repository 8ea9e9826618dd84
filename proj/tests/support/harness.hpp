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

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pco/config.hpp"
#include "pco/scripted_backend.hpp"
#include "pco/trainer.hpp"

namespace pcotest {

std::filesystem::path data_dir();

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// A bundled config plus its dataset ("synthetic" or "demo").
struct Bundle {
  pco::EngineConfig config;
  std::vector<pco::Example> dataset;
};

Bundle load_bundle(std::string_view name);

std::unique_ptr<pco::ScriptedBackend> scripted(const std::filesystem::path& fixture);
std::unique_ptr<pco::ScriptedBackend> scripted_from(std::string_view jsonl);

struct RunResult {
  pco::RunState state;
  std::vector<pco::StepRecord> log;
};

// Trains in-process on the bundle's dataset with its default templates.
RunResult train(const Bundle& bundle, const pco::TrainConfig& config, pco::Backend& backend);

// Lifetime routing entropy of a run, from its log.
double routing_entropy(const RunResult& run, std::size_t k);

std::string log_digest(const std::vector<pco::StepRecord>& log);

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args);

}  // namespace pcotest
