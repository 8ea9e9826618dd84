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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "pco/evalkit.hpp"
#include "pco/remote_backend.hpp"
#include "pco/templates.hpp"
#include "pco/trainer.hpp"

namespace pco {

enum class BackendKind { remote, scripted };

std::string_view to_string(BackendKind kind);

/// Engine configuration: a flat JSON object. Hyperparameter keys mirror the
/// usual symbols (k, s, alpha, tau, epsilon0, gamma, epsilon_min, epochs,
/// batch_size); unspecified keys keep their defaults.
struct EngineConfig {
  TrainConfig train;
  BackendKind backend = BackendKind::remote;
  std::filesystem::path fixture;
  EndpointSettings endpoint;
  std::map<Role, EndpointSettings> role_endpoints;
  int max_attempts = 3;
  int backoff_ms = 1000;
  int timeout_s = 120;
  std::filesystem::path dataset;
  std::filesystem::path out = "pco-out";
  std::map<std::string, std::filesystem::path> templates;
  TokenCountMode token_mode = TokenCountMode::approx;
};

/// Relative paths resolve against `base_dir`. Every bad key is reported in a
/// single `invalid_config` error.
EngineConfig parse_engine_config(std::string_view json,
                                 const std::filesystem::path& base_dir = {});
EngineConfig load_engine_config(const std::filesystem::path& path);

/// Command-line overrides; set fields win over the config file.
struct ConfigOverrides {
  std::optional<std::size_t> k, s, epochs, batch_size;
  std::optional<double> alpha, tau, epsilon0, gamma, epsilon_min;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> update_policy, init;
  std::optional<bool> no_encoder, no_textgrad, no_epsilon_greedy,
      uniform_sampling;
  std::optional<std::filesystem::path> dataset, out, fixture;
};

void apply_overrides(EngineConfig& config, const ConfigOverrides& overrides);

/// Effective configuration as pretty-printed JSON (secrets omitted).
std::string engine_config_json(const EngineConfig& config);

/// Train-config echo used inside checkpoints.
std::string train_config_json(const TrainConfig& config);
TrainConfig parse_train_config_json(std::string_view json);

}  // namespace pco
