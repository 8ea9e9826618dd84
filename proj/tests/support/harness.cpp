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

#include "support/harness.hpp"

#include <atomic>
#include <sstream>

#include <unistd.h>

#include "pco/commands.hpp"
#include "pco/dataset.hpp"
#include "pco/digest.hpp"
#include "pco/evalkit.hpp"

namespace pcotest {

namespace fs = std::filesystem;

fs::path data_dir() { return PCO_DATA_DIR; }

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("pco-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Bundle load_bundle(std::string_view name) {
  const fs::path dir = data_dir() / name;
  Bundle b{pco::load_engine_config(dir / "config.json"), {}};
  b.dataset = pco::load_dataset(b.config.dataset);
  return b;
}

std::unique_ptr<pco::ScriptedBackend> scripted(const fs::path& fixture) {
  return std::make_unique<pco::ScriptedBackend>(pco::ScriptedBackend::load(fixture).rules());
}

std::unique_ptr<pco::ScriptedBackend> scripted_from(std::string_view jsonl) {
  return std::make_unique<pco::ScriptedBackend>(pco::ScriptedBackend::parse(jsonl).rules());
}

RunResult train(const Bundle& bundle, const pco::TrainConfig& config, pco::Backend& backend) {
  pco::Trainer trainer(config, backend, pco::Templates::defaults());
  RunResult run{trainer.initial_state(), {}};
  pco::Trainer::Hooks hooks;
  hooks.on_step = [&](const pco::StepRecord& r, const pco::RunState&) { run.log.push_back(r); };
  trainer.train(run.state, bundle.dataset, hooks);
  return run;
}

double routing_entropy(const RunResult& run, std::size_t k) {
  std::vector<std::uint64_t> counts(k, 0);
  for (const auto& r : run.log) {
    for (std::size_t i : r.route.indices) ++counts[i];
  }
  const std::vector<double> ema(k, 0.0);
  return pco::utilization_stats(counts, ema).entropy_bits;
}

std::string log_digest(const std::vector<pco::StepRecord>& log) {
  std::string body;
  for (const auto& r : log) body += pco::to_json_line(r) + "\n";
  return pco::sha256_hex(body);
}

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = pco::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace pcotest
