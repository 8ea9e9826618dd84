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

#include "pco/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pco/error.hpp"

namespace pco {

namespace {

void check_schedule(double epsilon0, double gamma, double epsilon_min) {
  if (!(epsilon0 > 0.0 && epsilon0 <= 1.0)) {
    throw Error(ErrorCode::invalid_config, "epsilon0 must lie in (0, 1]");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::invalid_config, "gamma must lie in (0, 1]");
  }
  if (!(epsilon_min >= 0.0 && epsilon_min <= epsilon0)) {
    throw Error(ErrorCode::invalid_config, "epsilon_min must lie in [0, epsilon0]");
  }
}

}  // namespace

EpsilonSchedule::EpsilonSchedule(double epsilon0, double gamma, double epsilon_min)
    : epsilon0_(epsilon0), gamma_(gamma), epsilon_min_(epsilon_min), current_(epsilon0) {
  check_schedule(epsilon0, gamma, epsilon_min);
}

EpsilonSchedule EpsilonSchedule::restore(double epsilon0, double gamma,
                                         double epsilon_min, double current) {
  EpsilonSchedule schedule(epsilon0, gamma, epsilon_min);
  if (!(current >= epsilon_min && current <= epsilon0)) {
    throw Error(ErrorCode::integrity, "epsilon outside [epsilon_min, epsilon0]");
  }
  schedule.current_ = current;
  return schedule;
}

void EpsilonSchedule::decay() { current_ = std::max(epsilon_min_, gamma_ * current_); }

std::string_view to_string(RouteSource source) {
  switch (source) {
    case RouteSource::encoder: return "encoder";
    case RouteSource::exploration: return "exploration";
    case RouteSource::fallback: return "fallback";
  }
  return "unknown";
}

RouteSource parse_route_source(std::string_view name) {
  if (name == "encoder") return RouteSource::encoder;
  if (name == "exploration") return RouteSource::exploration;
  if (name == "fallback") return RouteSource::fallback;
  throw Error(ErrorCode::integrity, "unknown route source '" + std::string(name) + "'");
}

std::vector<std::size_t> success_weighted_sample(std::span<const double> ema,
                                                 std::size_t s, double tau,
                                                 Rng& rng) {
  if (!(tau > 0.0)) {
    throw Error(ErrorCode::invalid_config, "softmax temperature must be positive");
  }
  if (s == 0 || s > ema.size()) {
    throw Error(ErrorCode::invalid_config,
                "cannot draw " + std::to_string(s) + " distinct indices from " +
                    std::to_string(ema.size()));
  }
  std::vector<std::size_t> remaining(ema.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  std::vector<double> weights(ema.size());
  std::vector<std::size_t> chosen;
  chosen.reserve(s);

  for (std::size_t draw = 0; draw < s; ++draw) {
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t k : remaining) max_logit = std::max(max_logit, ema[k] / tau);
    double total = 0.0;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      weights[i] = std::exp(ema[remaining[i]] / tau - max_logit);
      total += weights[i];
    }
    const double u = rng.uniform() * total;
    std::size_t pick = remaining.size() - 1;  // guards against rounding at the top end
    double cumulative = 0.0;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      cumulative += weights[i];
      if (u < cumulative) {
        pick = i;
        break;
      }
    }
    chosen.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return chosen;
}

std::vector<std::size_t> uniform_sample(std::size_t k, std::size_t s, Rng& rng) {
  if (s == 0 || s > k) {
    throw Error(ErrorCode::invalid_config,
                "cannot draw " + std::to_string(s) + " distinct indices from " +
                    std::to_string(k));
  }
  std::vector<std::size_t> pool(k);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < s; ++i) {
    std::swap(pool[i], pool[i + rng.below(k - i)]);
  }
  pool.resize(s);
  return pool;
}

bool is_valid_route(std::span<const long long> candidate, std::size_t k,
                    std::size_t s) {
  if (candidate.size() != s) return false;
  std::vector<bool> seen(k, false);
  for (long long v : candidate) {
    if (v < 0 || static_cast<unsigned long long>(v) >= k) return false;
    if (seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = true;
  }
  return true;
}

RoutingDecision choose_route(double epsilon, const SamplerConfig& sampler,
                             ExplorationMode mode, std::span<const double> ema,
                             const EncoderFn& encoder, std::string_view input,
                             Rng& rng) {
  const auto explore = [&] {
    return mode == ExplorationMode::uniform
               ? uniform_sample(ema.size(), sampler.s, rng)
               : success_weighted_sample(ema, sampler.s, sampler.tau, rng);
  };

  RoutingDecision decision;
  if (rng.uniform() < epsilon) {
    decision.source = RouteSource::exploration;
    decision.indices = explore();
    return decision;
  }

  for (int attempt = 0; attempt < 2; ++attempt) {
    ++decision.encoder_attempts;
    const auto candidate = encoder(input);
    if (candidate && is_valid_route(*candidate, ema.size(), sampler.s)) {
      decision.source = RouteSource::encoder;
      decision.indices.assign(candidate->begin(), candidate->end());
      return decision;
    }
  }
  decision.source = RouteSource::fallback;
  decision.indices = explore();
  return decision;
}

}  // namespace pco
