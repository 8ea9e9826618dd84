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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pco/random.hpp"

namespace pco {

/// One codebook entry: a short natural-language directive plus the
/// statistics the optimizer keeps for its slot.
struct Instinct {
  std::size_t index = 0;
  std::string text;
  double ema_success = 0.0;      // r̄_k, stays in [0, 1]
  std::uint64_t usage_count = 0; // completed steps that routed through k
  std::uint64_t revision = 0;    // applied rewrites

  bool operator==(const Instinct&) const = default;
};

enum class InitStrategy { random, expert_seeded };

std::string_view to_string(InitStrategy strategy);
InitStrategy parse_init_strategy(std::string_view name);

struct UtilizationStats {
  double entropy_bits = 0.0;
  double utilization = 0.0;
  std::size_t unique_used = 0;
  double avg_sr = 0.0;
};

/// Routing-diversity statistics for a selection histogram. `ema` supplies
/// the per-slot success rates for the selection-weighted mean.
UtilizationStats utilization_stats(std::span<const std::uint64_t> counts,
                                   std::span<const double> ema);

/// Bundled pool of generic directives used for random initialization.
std::span<const std::string_view> generic_directive_pool();

/// The discrete codebook of K instincts.
///
/// K is fixed for the lifetime of a codebook. Rewrites replace the text of
/// one slot and keep its statistics: success rate and usage follow the slot,
/// not the wording.
class Codebook {
 public:
  /// Empty placeholder; only `create` and `from_parts` give a usable book.
  Codebook() = default;

  /// Random init samples K directives without replacement from the bundled
  /// pool; expert-seeded init takes the first K seed texts verbatim.
  static Codebook create(std::size_t k, InitStrategy init,
                         std::span<const std::string> seed_texts, Rng& rng);

  /// Rebuilds a codebook from persisted fields, validating every invariant.
  static Codebook from_parts(std::vector<Instinct> entries,
                             std::vector<std::uint64_t> selection_counts);

  std::size_t size() const { return entries_.size(); }
  const Instinct& at(std::size_t k) const;
  std::span<const Instinct> entries() const { return entries_; }
  std::span<const std::uint64_t> selection_counts() const {
    return selection_counts_;
  }
  std::vector<double> ema_vector() const;

  /// r̄_k <- (1 - alpha) r̄_k + alpha r_step for every k in `indices`.
  void ema_update(std::span<const std::size_t> indices, double r_step,
                  double alpha);

  /// Returns false (and leaves the entry untouched) for empty text.
  bool apply_rewrite(std::size_t k, std::string new_text);

  /// Adds one routing decision to the lifetime selection tallies.
  void record_routing(std::span<const std::size_t> indices);

  UtilizationStats utilization() const;

  /// One JSON record per line: index, text, ema_success, usage_count, revision.
  std::string export_jsonl() const;

  bool operator==(const Codebook&) const = default;

 private:
  void check_index(std::size_t k) const;

  std::vector<Instinct> entries_;
  std::vector<std::uint64_t> selection_counts_;
};

}  // namespace pco
