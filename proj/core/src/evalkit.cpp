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

#include "pco/evalkit.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "pco/error.hpp"
#include "pco/text.hpp"

namespace pco {

namespace {

struct ConstraintName {
  Constraint::Kind kind;
  std::string_view name;
  enum class Arg { none, count, text } arg;
};

constexpr ConstraintName kConstraintNames[] = {
    {Constraint::Kind::max_words, "max_words", ConstraintName::Arg::count},
    {Constraint::Kind::min_words, "min_words", ConstraintName::Arg::count},
    {Constraint::Kind::contains, "contains", ConstraintName::Arg::text},
    {Constraint::Kind::not_contains, "not_contains", ConstraintName::Arg::text},
    {Constraint::Kind::paragraph_count, "paragraph_count", ConstraintName::Arg::count},
    {Constraint::Kind::all_lowercase, "all_lowercase", ConstraintName::Arg::none},
    {Constraint::Kind::all_uppercase, "all_uppercase", ConstraintName::Arg::none},
};

const ConstraintName& name_of(Constraint::Kind kind) {
  for (const auto& n : kConstraintNames) {
    if (n.kind == kind) return n;
  }
  return kConstraintNames[0];
}

// A paragraph is a maximal run of non-blank lines.
std::size_t count_paragraphs(std::string_view s) {
  std::size_t paragraphs = 0;
  bool in_paragraph = false;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find('\n', start);
    if (end == std::string_view::npos) end = s.size();
    const bool blank = text::trim(s.substr(start, end - start)).empty();
    if (!blank && !in_paragraph) ++paragraphs;
    in_paragraph = !blank;
    start = end + 1;
  }
  return paragraphs;
}

bool has_any(std::string_view s, int (*pred)(int)) {
  return std::any_of(s.begin(), s.end(),
                     [pred](char c) { return pred(static_cast<unsigned char>(c)) != 0; });
}

}  // namespace

std::string_view to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::exact_match: return "exact_match";
    case RewardKind::normalized_contains: return "normalized_contains";
    case RewardKind::constraint_satisfaction: return "constraint_satisfaction";
  }
  return "unknown";
}

RewardKind parse_reward_kind(std::string_view name) {
  if (name == "exact_match") return RewardKind::exact_match;
  if (name == "normalized_contains") return RewardKind::normalized_contains;
  if (name == "constraint_satisfaction") return RewardKind::constraint_satisfaction;
  throw Error(ErrorCode::invalid_spec, "unknown reward kind '" + std::string(name) + "'");
}

Constraint Constraint::parse(std::string_view spec) {
  spec = text::trim(spec);
  const std::size_t colon = spec.find(':');
  const std::string_view name = text::trim(spec.substr(0, colon));
  std::string_view arg =
      colon == std::string_view::npos ? std::string_view() : text::trim(spec.substr(colon + 1));

  for (const auto& n : kConstraintNames) {
    if (n.name != name) continue;
    Constraint c;
    c.kind = n.kind;
    switch (n.arg) {
      case ConstraintName::Arg::none:
        if (colon != std::string_view::npos) {
          throw Error(ErrorCode::invalid_spec,
                      "constraint '" + std::string(name) + "' takes no argument");
        }
        break;
      case ConstraintName::Arg::count: {
        const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), c.count);
        if (arg.empty() || ec != std::errc() || ptr != arg.data() + arg.size()) {
          throw Error(ErrorCode::invalid_spec, "constraint '" + std::string(spec) +
                                                   "' needs a nonnegative integer argument");
        }
        break;
      }
      case ConstraintName::Arg::text:
        if (arg.size() >= 2 && arg.front() == '"' && arg.back() == '"') {
          arg = arg.substr(1, arg.size() - 2);
        }
        if (arg.empty()) {
          throw Error(ErrorCode::invalid_spec,
                      "constraint '" + std::string(spec) + "' needs a text argument");
        }
        c.text = std::string(arg);
        break;
    }
    return c;
  }
  throw Error(ErrorCode::invalid_spec, "unknown constraint kind '" + std::string(name) + "'");
}

std::string Constraint::to_string() const {
  const ConstraintName& n = name_of(kind);
  switch (n.arg) {
    case ConstraintName::Arg::none: return std::string(n.name);
    case ConstraintName::Arg::count: return std::string(n.name) + ":" + std::to_string(count);
    case ConstraintName::Arg::text: return std::string(n.name) + ":" + text;
  }
  return std::string(n.name);
}

std::string normalize(std::string_view s, const NormalizeOptions& options) {
  std::string out = options.collapse_whitespace ? text::collapse_whitespace(s) : std::string(s);
  if (options.case_fold) out = text::to_lower(out);
  return out;
}

bool check_constraint(const Constraint& constraint, std::string_view response,
                      const NormalizeOptions& options) {
  switch (constraint.kind) {
    case Constraint::Kind::max_words: return text::count_words(response) <= constraint.count;
    case Constraint::Kind::min_words: return text::count_words(response) >= constraint.count;
    case Constraint::Kind::contains:
      return normalize(response, options).find(normalize(constraint.text, options)) !=
             std::string::npos;
    case Constraint::Kind::not_contains:
      return normalize(response, options).find(normalize(constraint.text, options)) ==
             std::string::npos;
    case Constraint::Kind::paragraph_count:
      return count_paragraphs(response) == constraint.count;
    case Constraint::Kind::all_lowercase: return !has_any(response, &std::isupper);
    case Constraint::Kind::all_uppercase: return !has_any(response, &std::islower);
  }
  return false;
}

double reward(const RewardSpec& spec, std::string_view response, std::string_view reference,
              std::span<const Constraint> constraints) {
  switch (spec.kind) {
    case RewardKind::exact_match:
      return normalize(response, spec.options) == normalize(reference, spec.options) ? 1.0 : 0.0;
    case RewardKind::normalized_contains:
      return normalize(response, spec.options).find(normalize(reference, spec.options)) !=
                     std::string::npos
                 ? 1.0
                 : 0.0;
    case RewardKind::constraint_satisfaction: {
      if (constraints.empty()) return 1.0;
      std::size_t satisfied = 0;
      for (const Constraint& c : constraints) {
        if (check_constraint(c, response, spec.options)) ++satisfied;
      }
      return static_cast<double>(satisfied) / static_cast<double>(constraints.size());
    }
  }
  return 0.0;
}

std::string_view to_string(TokenCountMode mode) {
  return mode == TokenCountMode::approx ? "approx" : "backend";
}

TokenCountMode parse_token_count_mode(std::string_view name) {
  if (name == "approx") return TokenCountMode::approx;
  if (name == "backend") return TokenCountMode::backend;
  throw Error(ErrorCode::invalid_config, "unknown token count mode '" + std::string(name) + "'");
}

std::uint64_t approx_token_length(std::string_view prompt) {
  const std::uint64_t words = text::count_words(prompt);
  return (words * 4 + 2) / 3;
}

std::uint64_t prompt_token_length(std::string_view prompt, TokenCountMode mode,
                                  Backend* backend) {
  if (mode == TokenCountMode::backend) {
    if (backend) {
      if (const auto exact = backend->count_tokens(prompt)) return *exact;
    }
    static std::once_flag warned;
    std::call_once(warned, [] {
      spdlog::warn("backend cannot count tokens; using the word-based approximation");
    });
  }
  return approx_token_length(prompt);
}

RunSummary summarize(std::span<const StepRecord> log, const Codebook& codebook,
                     TokenCountMode mode, Backend* backend) {
  RunSummary summary;
  summary.steps = log.size();
  std::vector<std::uint64_t> counts(codebook.size(), 0);
  std::map<std::size_t, std::pair<std::size_t, double>> per_epoch;
  double token_sum = 0.0;
  for (const StepRecord& r : log) {
    for (std::size_t k : r.route.indices) {
      if (k < counts.size()) ++counts[k];
    }
    const std::uint64_t tokens = prompt_token_length(r.prompt, mode, backend);
    summary.max_prompt_tokens = std::max(summary.max_prompt_tokens, tokens);
    token_sum += static_cast<double>(tokens);
    auto& [steps, total] = per_epoch[r.epoch];
    ++steps;
    total += r.reward;
  }
  if (!log.empty()) summary.mean_prompt_tokens = token_sum / static_cast<double>(log.size());

  const std::vector<double> ema = codebook.ema_vector();
  summary.routing = utilization_stats(counts, ema);
  for (const Instinct& e : codebook.entries()) {
    summary.instincts.push_back(InstinctRow{e.index, e.text, counts[e.index], e.ema_success});
  }
  std::stable_sort(summary.instincts.begin(), summary.instincts.end(),
                   [](const InstinctRow& a, const InstinctRow& b) { return a.sr > b.sr; });
  for (const auto& [epoch, acc] : per_epoch) {
    summary.reward_curve.push_back(
        EpochReward{epoch, acc.first, acc.second / static_cast<double>(acc.first)});
  }
  return summary;
}

std::string summary_json(const RunSummary& summary) {
  nlohmann::ordered_json j;
  j["steps"] = summary.steps;
  j["max_prompt_tokens"] = summary.max_prompt_tokens;
  j["mean_prompt_tokens"] = summary.mean_prompt_tokens;
  j["entropy_bits"] = summary.routing.entropy_bits;
  j["utilization"] = summary.routing.utilization;
  j["unique_used"] = summary.routing.unique_used;
  j["avg_sr"] = summary.routing.avg_sr;
  auto& rows = j["instincts"] = nlohmann::ordered_json::array();
  for (const InstinctRow& r : summary.instincts) {
    rows.push_back({{"index", r.index}, {"text", r.text}, {"usage", r.usage}, {"sr", r.sr}});
  }
  auto& curve = j["reward_curve"] = nlohmann::ordered_json::array();
  for (const EpochReward& e : summary.reward_curve) {
    curve.push_back({{"epoch", e.epoch}, {"steps", e.steps}, {"mean_reward", e.mean_reward}});
  }
  return j.dump(2);
}

std::string summary_table(const RunSummary& summary) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line,
                "steps %zu | prompt tokens max %llu mean %.1f\n"
                "routing entropy %.3f bits | utilization %.1f%% (%zu used) | avg sr %.3f\n\n",
                summary.steps, static_cast<unsigned long long>(summary.max_prompt_tokens),
                summary.mean_prompt_tokens, summary.routing.entropy_bits,
                100.0 * summary.routing.utilization, summary.routing.unique_used,
                summary.routing.avg_sr);
  out << line;
  out << "  ID  Usage(n)   sr(%)  Instinct\n";
  for (const InstinctRow& r : summary.instincts) {
    std::snprintf(line, sizeof line, "%4zu  %8llu  %6.2f  ", r.index,
                  static_cast<unsigned long long>(r.usage), 100.0 * r.sr);
    out << line << text::single_line(r.text) << '\n';
  }
  if (!summary.reward_curve.empty()) {
    out << "\nEpoch  Steps  MeanReward\n";
    for (const EpochReward& e : summary.reward_curve) {
      std::snprintf(line, sizeof line, "%5zu  %5zu  %10.4f\n", e.epoch + 1, e.steps,
                    e.mean_reward);
      out << line;
    }
  }
  return out.str();
}

}  // namespace pco
