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

#include "pco/codebook.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "pco/error.hpp"

namespace pco {

namespace {

constexpr std::array<std::string_view, 72> kDirectivePool = {
    "Restate the task in your own words before answering.",
    "Break the problem into ordered sub-steps and solve them one at a time.",
    "List the explicit constraints of the request and check each one before finishing.",
    "Identify the entities involved and how they relate to each other.",
    "State the assumptions you rely on and flag any that are uncertain.",
    "Work backward from the expected form of the answer.",
    "Verify every intermediate result before building on it.",
    "Prefer short, declarative sentences over long explanations.",
    "Match the output format requested exactly, including length limits.",
    "Check the final answer against the original question one more time.",
    "Separate facts given in the input from facts you infer.",
    "When information is missing, say what is missing instead of guessing.",
    "Consider at least one alternative interpretation of the question.",
    "Track units and quantities explicitly through every calculation.",
    "Resolve references such as pronouns to the entities they denote.",
    "Summarize the key evidence before stating a conclusion.",
    "Order events on a timeline when the question involves time.",
    "Decompose multi-hop questions into single-hop sub-questions.",
    "Look for counterexamples to your tentative answer.",
    "Keep the answer focused on what was asked; omit tangents.",
    "Use numbered steps for any procedure with more than two actions.",
    "Quote the exact phrase from the input that supports each claim.",
    "Estimate the answer roughly first, then compute it precisely.",
    "Check edge cases such as zero, empty, or boundary values.",
    "Name the rule or principle you apply at each step.",
    "Avoid hedging language when the evidence is conclusive.",
    "Use consistent terminology for the same concept throughout.",
    "Prefer concrete examples over abstract statements.",
    "Confirm that every part of a multi-part question is answered.",
    "Write the final answer on its own line after the reasoning.",
    "Respect requested tone, audience, and register.",
    "Remove personal or sensitive details unless they are required.",
    "Compare candidate answers explicitly and justify the choice.",
    "Simplify expressions before substituting values.",
    "Note invariants that must hold and check them at the end.",
    "Distinguish correlation from causation in explanations.",
    "Count items carefully when the task depends on a number of things.",
    "Keep paragraphs short and give each a single purpose.",
    "Use the vocabulary of the input when naming things.",
    "Reject answers that contradict any given premise.",
    "If a word count is requested, count words before finalizing.",
    "Translate the question into a precise formal statement first.",
    "Highlight the single most important point first.",
    "Group related ideas together before writing them out.",
    "Double-check negations and quantifiers such as all, some, none.",
    "Cross-check facts that come from different parts of the input.",
    "Make each step follow logically from the previous one.",
    "State the answer with the precision the question requires.",
    "Prefer the simplest explanation consistent with the evidence.",
    "Describe the approach in one sentence before executing it.",
    "Identify what kind of problem this is before solving it.",
    "Reuse results from earlier steps instead of recomputing them.",
    "Check that lists requested as N items contain exactly N items.",
    "Follow the requested casing and punctuation rules exactly.",
    "Flag ambiguous instructions and choose the most literal reading.",
    "Eliminate clearly wrong options before choosing among the rest.",
    "Bound the answer from above and below as a sanity check.",
    "Keep calculations visible so errors can be traced.",
    "Attribute each claim to the source passage it came from.",
    "Prefer active voice and direct instructions.",
    "Avoid repeating the question back in the final answer.",
    "Check dates, names, and numbers for transcription errors.",
    "When rewriting text, preserve its meaning and key facts.",
    "Handle each constraint independently, then check them together.",
    "Describe the expected output shape before producing it.",
    "Use a table when comparing several items on the same attributes.",
    "Stop and re-read the question if an intermediate result looks odd.",
    "Prefer widely accepted definitions over idiosyncratic ones.",
    "Explain why rejected alternatives fail, briefly.",
    "Make the final answer self-contained.",
    "Trace how each premise contributes to the conclusion.",
    "Keep the response within the requested length.",
};

}  // namespace

std::string_view to_string(InitStrategy strategy) {
  return strategy == InitStrategy::random ? "random" : "expert";
}

InitStrategy parse_init_strategy(std::string_view name) {
  if (name == "random") return InitStrategy::random;
  if (name == "expert" || name == "expert_seeded") return InitStrategy::expert_seeded;
  throw Error(ErrorCode::invalid_config,
              "unknown init strategy '" + std::string(name) + "'");
}

std::span<const std::string_view> generic_directive_pool() { return kDirectivePool; }

UtilizationStats utilization_stats(std::span<const std::uint64_t> counts,
                                   std::span<const double> ema) {
  UtilizationStats stats;
  if (counts.empty()) return stats;
  const double total = static_cast<double>(
      std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) continue;
    ++stats.unique_used;
    const double p = static_cast<double>(counts[k]) / total;
    stats.entropy_bits -= p * std::log2(p);
    if (k < ema.size()) stats.avg_sr += p * ema[k];
  }
  // -0.0 for a single-slot distribution reads oddly in reports.
  if (stats.entropy_bits <= 0.0) stats.entropy_bits = 0.0;
  stats.utilization =
      static_cast<double>(stats.unique_used) / static_cast<double>(counts.size());
  return stats;
}

Codebook Codebook::create(std::size_t k, InitStrategy init,
                          std::span<const std::string> seed_texts, Rng& rng) {
  if (k == 0) {
    throw Error(ErrorCode::invalid_config, "codebook size K must be positive");
  }
  Codebook book;
  book.entries_.reserve(k);
  if (init == InitStrategy::expert_seeded) {
    if (seed_texts.size() < k) {
      throw Error(ErrorCode::invalid_config,
                  "expert-seeded init needs " + std::to_string(k) +
                      " seed texts, got " + std::to_string(seed_texts.size()));
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (seed_texts[i].empty()) {
        throw Error(ErrorCode::invalid_config,
                    "seed text " + std::to_string(i) + " is empty");
      }
      book.entries_.push_back(Instinct{i, seed_texts[i]});
    }
  } else {
    if (k > kDirectivePool.size()) {
      throw Error(ErrorCode::invalid_config,
                  "random init supports K <= " +
                      std::to_string(kDirectivePool.size()) +
                      "; use expert-seeded init for larger codebooks");
    }
    std::vector<std::size_t> order(kDirectivePool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Partial Fisher-Yates: the first k positions are a uniform draw
    // without replacement.
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(order[i], order[i + rng.below(order.size() - i)]);
      book.entries_.push_back(Instinct{i, std::string(kDirectivePool[order[i]])});
    }
  }
  book.selection_counts_.assign(k, 0);
  return book;
}

Codebook Codebook::from_parts(std::vector<Instinct> entries,
                              std::vector<std::uint64_t> selection_counts) {
  if (entries.empty()) {
    throw Error(ErrorCode::integrity, "codebook has no entries");
  }
  if (selection_counts.size() != entries.size()) {
    throw Error(ErrorCode::integrity, "selection counts do not match codebook size");
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Instinct& e = entries[i];
    if (e.index != i) {
      throw Error(ErrorCode::integrity, "codebook index gap at position " + std::to_string(i));
    }
    if (e.text.empty()) {
      throw Error(ErrorCode::integrity, "codebook entry " + std::to_string(i) + " has empty text");
    }
    if (!(e.ema_success >= 0.0 && e.ema_success <= 1.0)) {
      throw Error(ErrorCode::integrity, "codebook entry " + std::to_string(i) +
                                            " has success rate outside [0, 1]");
    }
  }
  Codebook book;
  book.entries_ = std::move(entries);
  book.selection_counts_ = std::move(selection_counts);
  return book;
}

void Codebook::check_index(std::size_t k) const {
  if (k >= entries_.size()) {
    throw Error(ErrorCode::invalid_index,
                "instinct index " + std::to_string(k) + " outside [0, " +
                    std::to_string(entries_.size()) + ")");
  }
}

const Instinct& Codebook::at(std::size_t k) const {
  check_index(k);
  return entries_[k];
}

std::vector<double> Codebook::ema_vector() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const Instinct& e : entries_) out.push_back(e.ema_success);
  return out;
}

void Codebook::ema_update(std::span<const std::size_t> indices, double r_step,
                          double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::invalid_config, "EMA step size must lie in (0, 1]");
  }
  if (!(r_step >= 0.0 && r_step <= 1.0)) {
    throw Error(ErrorCode::invalid_reward, "step reward must lie in [0, 1]");
  }
  for (std::size_t k : indices) check_index(k);
  for (std::size_t k : indices) {
    Instinct& e = entries_[k];
    e.ema_success = (1.0 - alpha) * e.ema_success + alpha * r_step;
    ++e.usage_count;
  }
}

bool Codebook::apply_rewrite(std::size_t k, std::string new_text) {
  check_index(k);
  if (new_text.empty()) {
    spdlog::warn("rejected empty rewrite for instinct {}", k);
    return false;
  }
  entries_[k].text = std::move(new_text);
  ++entries_[k].revision;
  return true;
}

void Codebook::record_routing(std::span<const std::size_t> indices) {
  for (std::size_t k : indices) check_index(k);
  for (std::size_t k : indices) ++selection_counts_[k];
}

UtilizationStats Codebook::utilization() const {
  const std::vector<double> ema = ema_vector();
  return utilization_stats(selection_counts_, ema);
}

std::string Codebook::export_jsonl() const {
  std::string out;
  for (const Instinct& e : entries_) {
    nlohmann::ordered_json j;
    j["index"] = e.index;
    j["text"] = e.text;
    j["ema_success"] = e.ema_success;
    j["usage_count"] = e.usage_count;
    j["revision"] = e.revision;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace pco
