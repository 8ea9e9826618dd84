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

#include "pco/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "pco/error.hpp"

namespace pco {

namespace {

void require(bool ok, const char* key, const std::string& why) {
  if (!ok) throw Error(ErrorCode::invalid_config, std::string(key) + ": " + why);
}

bool in_unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

// Failures that lose one step but leave the run healthy.
bool skippable(ErrorCode code) {
  return code == ErrorCode::backend_unavailable || code == ErrorCode::generation_failure ||
         code == ErrorCode::critic_failure;
}

std::string critic_reference(const Example& example) {
  if (!example.reference.empty() || example.constraints.empty()) return example.reference;
  std::string out = "The response must satisfy:";
  for (const Constraint& c : example.constraints) out += "\n- " + c.to_string();
  return out;
}

std::string current_text(const VariableId& v, const Codebook& codebook,
                         const Trainables& trainables) {
  switch (v.kind) {
    case VariableId::Kind::phi: return trainables.phi;
    case VariableId::Kind::theta: return trainables.theta;
    case VariableId::Kind::instinct: return codebook.at(v.instinct).text;
  }
  return {};
}

}  // namespace

std::string_view to_string(UpdatePolicy policy) {
  return policy == UpdatePolicy::gated ? "gated" : "always";
}

UpdatePolicy parse_update_policy(std::string_view name) {
  if (name == "gated") return UpdatePolicy::gated;
  if (name == "always") return UpdatePolicy::always;
  throw Error(ErrorCode::invalid_config, "unknown update policy '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  require(k >= 1, "k", "must be at least 1");
  require(s >= 1 && s <= k, "s", "must lie in [1, k]");
  require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 1.0, "alpha", "must lie in (0, 1]");
  require(std::isfinite(tau) && tau > 0.0, "tau", "must be positive");
  require(in_unit_interval(epsilon0), "epsilon0", "must lie in [0, 1]");
  require(in_unit_interval(gamma), "gamma", "must lie in [0, 1]");
  require(in_unit_interval(epsilon_min) && epsilon_min <= epsilon0, "epsilon_min",
          "must lie in [0, epsilon0]");
  require(epochs >= 1, "epochs", "must be at least 1");
  require(batch_size >= 1, "batch_size", "must be at least 1");
  require(in_unit_interval(skip_threshold), "skip_threshold", "must lie in [0, 1]");
  if (init == InitStrategy::expert_seeded) {
    const auto usable = std::count_if(seed_texts.begin(), seed_texts.end(),
                                      [](const std::string& t) { return !t.empty(); });
    require(static_cast<std::size_t>(usable) >= k, "seed_texts",
            "expert init needs at least k nonempty seed texts, got " + std::to_string(usable));
  }
}

Trainer::Trainer(TrainConfig config, Backend& backend, Templates templates)
    : config_(std::move(config)), backend_(backend), roles_(backend, std::move(templates)) {
  config_.validate();
}

RunState Trainer::initial_state() const {
  RunState state;
  state.schedule = EpsilonSchedule(config_.epsilon0, config_.gamma, config_.epsilon_min);
  state.trainables = Trainables::from_templates(roles_.templates());
  state.critic_prompt = roles_.templates().critic_policy;
  state.rng = Rng(config_.seed);
  state.codebook = Codebook::create(config_.k, config_.init, config_.seed_texts, state.rng);
  return state;
}

double Trainer::effective_epsilon(const RunState& state) const {
  if (config_.ablations.no_encoder) return 1.0;
  if (config_.ablations.no_epsilon_greedy && state.epoch >= 1) return 0.0;
  return state.schedule.current();
}

std::optional<StepRecord> Trainer::step(std::span<const Example> dataset,
                                        std::size_t example_id, RunState& state) {
  if (example_id >= dataset.size()) {
    throw Error(ErrorCode::invalid_index, "example " + std::to_string(example_id) +
                                              " outside a dataset of " +
                                              std::to_string(dataset.size()));
  }
  const Example& example = dataset[example_id];
  const TelemetryCounts before = backend_.telemetry().snapshot();
  auto settle_telemetry = [&] {
    TelemetryCounts delta = backend_.telemetry().snapshot();
    delta -= before;
    state.telemetry += delta;
  };

  StepRecord record;
  record.step = state.steps_attempted++;
  record.epoch = state.epoch;
  record.example_id = example_id;

  // Work on copies; nothing reaches `state` unless the step completes.
  Rng rng = state.rng;
  Codebook codebook = state.codebook;
  Trainables trainables = state.trainables;
  try {
    const ExplorationMode mode = config_.ablations.uniform_sampling
                                     ? ExplorationMode::uniform
                                     : ExplorationMode::success_weighted;
    const std::vector<double> ema = state.codebook.ema_vector();
    const EncoderFn encoder = [&](std::string_view input) {
      return roles_.encode(input, state.codebook, state.trainables.theta, config_.s,
                           Phase::training);
    };
    record.route = choose_route(effective_epsilon(state), {config_.s, config_.tau}, mode, ema,
                                encoder, example.input, rng);
    if (record.route.source == RouteSource::fallback) {
      backend_.telemetry().record_encoder_fallback();
    }

    std::vector<std::string> instinct_texts;
    for (std::size_t k : record.route.indices) {
      instinct_texts.push_back(state.codebook.at(k).text);
    }
    record.prompt = roles_.generate_prompt(example.input, instinct_texts,
                                           state.trainables.phi, Phase::training);
    record.response = roles_.execute_target(record.prompt, example.input, Phase::training);
    record.reward = reward(config_.reward, record.response, example.reference,
                           example.constraints);

    if (!config_.ablations.no_textgrad) {
      const Verdict verdict =
          roles_.critique(record.response, example.input, record.prompt,
                          critic_reference(example), record.route.indices, state.codebook);
      record.severity = verdict.severity;

      std::vector<VariableId> variables{VariableId::phi_var(), VariableId::theta_var()};
      std::vector<std::size_t> active = record.route.indices;
      std::sort(active.begin(), active.end());
      for (std::size_t k : active) variables.push_back(VariableId::instinct_var(k));

      for (const VariableId& v : variables) {
        const std::string current = current_text(v, state.codebook, state.trainables);
        TextGradient gradient = roles_.attribute(verdict, v, current);
        if (gradient.critique.empty() && config_.update_policy == UpdatePolicy::always) {
          gradient.critique = verdict.raw.empty()
                                  ? "No specific failure was found; tighten the text."
                                  : verdict.raw;
        }
        if (gradient.critique.empty()) continue;
        std::string revised = roles_.apply_textgrad(v, current, gradient);
        if (revised == current) continue;
        switch (v.kind) {
          case VariableId::Kind::phi:
            trainables.phi = std::move(revised);
            ++trainables.phi_revision;
            break;
          case VariableId::Kind::theta:
            trainables.theta = std::move(revised);
            ++trainables.theta_revision;
            break;
          case VariableId::Kind::instinct:
            if (!codebook.apply_rewrite(v.instinct, std::move(revised))) continue;
            break;
        }
        record.updated.push_back(v.to_string());
      }
    }

    codebook.record_routing(record.route.indices);
    codebook.ema_update(record.route.indices, record.reward, config_.alpha);
  } catch (const Error& e) {
    if (!skippable(e.code())) {
      settle_telemetry();
      throw;
    }
    spdlog::warn("step {} (example {}) skipped: {}", record.step, example_id, e.what());
    backend_.telemetry().record_skipped_step();
    state.rng = rng;
    settle_telemetry();
    return std::nullopt;
  }

  state.rng = rng;
  state.codebook = std::move(codebook);
  state.trainables = std::move(trainables);
  ++state.steps_completed;
  settle_telemetry();
  return record;
}

void Trainer::train(RunState& state, std::span<const Example> dataset, const Hooks& hooks,
                    std::optional<std::size_t> stop_after_epoch) {
  if (dataset.empty()) throw Error(ErrorCode::invalid_dataset, "dataset is empty");
  if (state.codebook.size() != config_.k) {
    throw Error(ErrorCode::integrity, "state holds " + std::to_string(state.codebook.size()) +
                                          " instincts but k is " + std::to_string(config_.k));
  }
  const std::size_t n = dataset.size();
  const std::size_t target = std::min(config_.epochs, stop_after_epoch.value_or(config_.epochs));

  while (state.epoch < target) {
    if (state.cursor == 0) {
      state.order.resize(n);
      std::iota(state.order.begin(), state.order.end(), std::size_t{0});
      state.rng.shuffle(state.order);
      state.skipped_in_epoch = 0;
    }
    if (state.order.size() != n || state.cursor > n) {
      throw Error(ErrorCode::integrity,
                  "saved epoch order does not match a dataset of " + std::to_string(n));
    }
    spdlog::info("epoch {}/{} epsilon {:.4f}", state.epoch + 1, config_.epochs,
                 effective_epsilon(state));

    while (state.cursor < n) {
      const std::size_t id = state.order[state.cursor];
      const std::optional<StepRecord> record = step(dataset, id, state);
      ++state.cursor;
      if (record) {
        if (hooks.on_step) hooks.on_step(*record, state);
      } else if (static_cast<double>(++state.skipped_in_epoch) >
                 config_.skip_threshold * static_cast<double>(n)) {
        throw Error(ErrorCode::training_aborted,
                    std::to_string(state.skipped_in_epoch) + " of " + std::to_string(n) +
                        " steps skipped in epoch " + std::to_string(state.epoch + 1));
      }
      if (state.cursor % config_.batch_size == 0 && state.cursor < n && hooks.on_checkpoint) {
        hooks.on_checkpoint(state);
      }
    }

    state.schedule.decay();
    ++state.epoch;
    state.cursor = 0;
    state.order.clear();
    if (hooks.on_checkpoint) hooks.on_checkpoint(state);
  }
}

InferenceResult infer(std::string_view input, const Codebook& codebook,
                      const Trainables& trainables, std::size_t s, Roles& roles) {
  InferenceResult result;
  result.route.source = RouteSource::encoder;
  for (int attempt = 1; attempt <= 2; ++attempt) {
    result.route.encoder_attempts = attempt;
    const auto candidate = roles.encode(input, codebook, trainables.theta, s, Phase::inference);
    if (candidate && is_valid_route(*candidate, codebook.size(), s)) {
      result.route.indices.assign(candidate->begin(), candidate->end());
      break;
    }
  }
  if (result.route.indices.empty()) {
    throw Error(ErrorCode::parse_failure,
                "encoder did not return " + std::to_string(s) + " distinct valid indices");
  }
  std::vector<std::string> texts;
  for (std::size_t k : result.route.indices) texts.push_back(codebook.at(k).text);
  result.prompt = roles.generate_prompt(input, texts, trainables.phi, Phase::inference);
  result.response = roles.execute_target(result.prompt, input, Phase::inference);
  return result;
}

}  // namespace pco
