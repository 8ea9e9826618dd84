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
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pco/random.hpp"

namespace pco {

/// Per-epoch decaying exploration rate: ε <- max(ε_min, γ ε).
class EpsilonSchedule {
 public:
  EpsilonSchedule(double epsilon0 = 1.0, double gamma = 0.15,
                  double epsilon_min = 0.15);

  /// Restores a schedule mid-run; `current` must lie in [ε_min, ε0].
  static EpsilonSchedule restore(double epsilon0, double gamma,
                                 double epsilon_min, double current);

  double epsilon0() const { return epsilon0_; }
  double gamma() const { return gamma_; }
  double epsilon_min() const { return epsilon_min_; }
  double current() const { return current_; }

  void decay();

  bool operator==(const EpsilonSchedule&) const = default;

 private:
  double epsilon0_;
  double gamma_;
  double epsilon_min_;
  double current_;
};

struct SamplerConfig {
  std::size_t s = 4;  // bottleneck width
  double tau = 0.5;   // softmax temperature
};

enum class ExplorationMode { success_weighted, uniform };

enum class RouteSource { encoder, exploration, fallback };

std::string_view to_string(RouteSource source);
RouteSource parse_route_source(std::string_view name);

struct RoutingDecision {
  std::vector<std::size_t> indices;
  RouteSource source = RouteSource::exploration;
  int encoder_attempts = 0;

  bool operator==(const RoutingDecision&) const = default;
};

/// Draws `s` distinct indices sequentially without replacement, each draw
/// with P(k) proportional to exp(r̄_k / tau) over the indices not yet chosen.
std::vector<std::size_t> success_weighted_sample(std::span<const double> ema,
                                                 std::size_t s, double tau,
                                                 Rng& rng);

/// Uniform draw of `s` distinct indices out of `k`.
std::vector<std::size_t> uniform_sample(std::size_t k, std::size_t s, Rng& rng);

/// The encoder's raw index list, or nullopt when nothing parsed.
using EncoderFn =
    std::function<std::optional<std::vector<long long>>(std::string_view input)>;

/// True iff `candidate` is exactly `s` distinct indices in [0, k).
bool is_valid_route(std::span<const long long> candidate, std::size_t k,
                    std::size_t s);

/// ε-greedy route selection. With probability `epsilon` the route comes from
/// the exploration sampler; otherwise from the encoder, which gets one retry
/// on malformed output before the sampler is used as a fallback.
RoutingDecision choose_route(double epsilon, const SamplerConfig& sampler,
                             ExplorationMode mode, std::span<const double> ema,
                             const EncoderFn& encoder, std::string_view input,
                             Rng& rng);

}  // namespace pco
