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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pco/backend.hpp"
#include "pco/codebook.hpp"
#include "pco/evalkit.hpp"
#include "pco/exploration.hpp"
#include "pco/random.hpp"
#include "pco/roles.hpp"
#include "pco/run_log.hpp"

namespace pco {

/// gated: variables whose scoped critique is empty are left alone.
/// always: every variable in {phi, theta} and the active slots is sent to
/// the updater on every step.
enum class UpdatePolicy { gated, always };

std::string_view to_string(UpdatePolicy policy);
UpdatePolicy parse_update_policy(std::string_view name);

struct AblationFlags {
  bool no_encoder = false;         // every route comes from exploration
  bool no_textgrad = false;        // no critic, attribution or rewrites
  bool no_epsilon_greedy = false;  // ε = 0 from the second epoch on
  bool uniform_sampling = false;   // exploration ignores success rates

  bool operator==(const AblationFlags&) const = default;
};

/// Defaults are the reference hyperparameters.
struct TrainConfig {
  std::size_t k = 16;
  std::size_t s = 4;
  double alpha = 0.1;
  double tau = 0.5;
  double epsilon0 = 1.0;
  double gamma = 0.15;
  double epsilon_min = 0.15;
  std::size_t epochs = 50;
  std::size_t batch_size = 15;
  std::uint64_t seed = 0;
  UpdatePolicy update_policy = UpdatePolicy::gated;
  AblationFlags ablations;
  InitStrategy init = InitStrategy::random;
  std::vector<std::string> seed_texts;
  RewardSpec reward;
  double skip_threshold = 0.2;  // abort when a larger fraction of an epoch is skipped

  /// Throws `invalid_config` naming the offending key.
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

struct Example {
  std::string input;
  std::string reference;
  std::vector<Constraint> constraints;

  bool operator==(const Example&) const = default;
};

/// Everything needed to resume training exactly where it stopped.
struct RunState {
  std::size_t epoch = 0;   // completed epochs
  std::size_t cursor = 0;  // steps attempted in the current epoch
  std::vector<std::size_t> order;  // current epoch's visiting order
  std::size_t skipped_in_epoch = 0;
  std::uint64_t steps_attempted = 0;
  std::uint64_t steps_completed = 0;
  EpsilonSchedule schedule;
  Codebook codebook;
  Trainables trainables;
  std::string critic_prompt;  // fixed for the whole run
  Rng rng;
  TelemetryCounts telemetry;

  bool operator==(const RunState&) const = default;
};

struct InferenceResult {
  RoutingDecision route;
  std::string prompt;
  std::string response;
};

class Trainer {
 public:
  struct Hooks {
    /// After every completed step, with the committed state.
    std::function<void(const StepRecord&, const RunState&)> on_step;
    /// After every full batch and after every epoch (post-decay).
    std::function<void(const RunState&)> on_checkpoint;
  };

  /// The config is validated here.
  Trainer(TrainConfig config, Backend& backend, Templates templates);

  const TrainConfig& config() const { return config_; }

  /// Fresh state: initialized codebook, default policies, ε = ε0.
  RunState initial_state() const;

  /// Runs (or resumes) training until `config.epochs` epochs are complete,
  /// or until `stop_after_epoch` epochs are complete if given.
  void train(RunState& state, std::span<const Example> dataset,
             const Hooks& hooks = {},
             std::optional<std::size_t> stop_after_epoch = std::nullopt);

  /// One atomic step on `dataset[example_id]`. Returns nullopt when the step
  /// was skipped; in that case no trainable or statistic changed.
  std::optional<StepRecord> step(std::span<const Example> dataset,
                                 std::size_t example_id, RunState& state);

  /// ε used for the current epoch, after ablation overrides.
  double effective_epsilon(const RunState& state) const;

 private:
  TrainConfig config_;
  Backend& backend_;
  Roles roles_;
};

/// Frozen forward pass: encoder-only routing, greedy decoding, no mutation.
/// An encoder that fails validation twice raises `parse_failure`.
InferenceResult infer(std::string_view input, const Codebook& codebook,
                      const Trainables& trainables, std::size_t s,
                      Roles& roles);

}  // namespace pco
