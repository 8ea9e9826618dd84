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

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "pco/error.hpp"
#include "pco/run_log.hpp"
#include "support/oracles.hpp"

namespace pco {
namespace {

std::vector<Constraint> parse_all(std::initializer_list<std::string_view> specs) {
  std::vector<Constraint> out;
  for (auto s : specs) out.push_back(Constraint::parse(s));
  return out;
}

const RewardSpec kCsr{RewardKind::constraint_satisfaction, {}};

TEST(Constraint, ParsesAllKinds) {
  EXPECT_EQ(Constraint::parse("max_words:5").count, 5u);
  EXPECT_EQ(Constraint::parse(" min_words : 2 ").kind, Constraint::Kind::min_words);
  EXPECT_EQ(Constraint::parse("contains:\"two words\"").text, "two words");
  EXPECT_EQ(Constraint::parse("not_contains:no").kind, Constraint::Kind::not_contains);
  EXPECT_EQ(Constraint::parse("paragraph_count:3").count, 3u);
  EXPECT_EQ(Constraint::parse("all_lowercase").kind, Constraint::Kind::all_lowercase);
  EXPECT_EQ(Constraint::parse("all_uppercase").kind, Constraint::Kind::all_uppercase);
}

TEST(Constraint, RejectsMalformedSpecs) {
  for (std::string_view bad : {"max_words", "max_words:-1", "max_words:5x", "contains:",
                               "contains:\"\"", "all_lowercase:yes", "rhymes:cat", ""}) {
    try {
      Constraint::parse(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::invalid_spec) << bad;
    }
  }
}

TEST(Constraint, TextFormRoundTrips) {
  for (std::string_view s : {"max_words:5", "contains:yes", "paragraph_count:2", "all_uppercase"}) {
    EXPECT_EQ(Constraint::parse(s).to_string(), s);
    EXPECT_EQ(Constraint::parse(Constraint::parse(s).to_string()), Constraint::parse(s));
  }
}

TEST(Reward, ConstraintSatisfactionExamples) {
  const auto cs = parse_all({"max_words:5", "contains:yes"});
  EXPECT_EQ(reward(kCsr, "yes indeed", "", cs), 1.0);
  EXPECT_EQ(reward(kCsr, "well yes it is true but I am not sure", "", cs), 0.5);
  EXPECT_EQ(reward(kCsr, "no", "", cs), 0.5);
  EXPECT_EQ(reward(kCsr, "perhaps not quite that one either", "", cs), 0.0);
  EXPECT_EQ(reward(kCsr, "anything", "", {}), 1.0);
}

TEST(Reward, ContainsIsCaseAndSpaceInsensitiveByDefault) {
  const auto cs = parse_all({"contains:Hello   World"});
  EXPECT_EQ(reward(kCsr, "she said hello\nworld", "", cs), 1.0);
  RewardSpec strict = kCsr;
  strict.options = {false, false};
  EXPECT_EQ(reward(strict, "she said hello\nworld", "", cs), 0.0);
}

TEST(Reward, ParagraphsAndCase) {
  const auto two = parse_all({"paragraph_count:2"});
  EXPECT_EQ(reward(kCsr, "a\nb\n\n  \nc\n", "", two), 1.0);
  EXPECT_EQ(reward(kCsr, "a\nb\nc", "", two), 0.0);
  EXPECT_EQ(reward(kCsr, "", "", parse_all({"paragraph_count:0"})), 1.0);
  EXPECT_EQ(reward(kCsr, "all quiet 42.", "", parse_all({"all_lowercase"})), 1.0);
  EXPECT_EQ(reward(kCsr, "all Quiet", "", parse_all({"all_lowercase"})), 0.0);
  EXPECT_EQ(reward(kCsr, "LOUD 42!", "", parse_all({"all_uppercase"})), 1.0);
}

TEST(Reward, ExactAndContainsMatch) {
  const RewardSpec exact{RewardKind::exact_match, {}};
  EXPECT_EQ(reward(exact, "  Forty  Two ", "forty two", {}), 1.0);
  EXPECT_EQ(reward(exact, "forty-two", "forty two", {}), 0.0);
  const RewardSpec contains{RewardKind::normalized_contains, {}};
  EXPECT_EQ(reward(contains, "The answer is 42.", "42", {}), 1.0);
  EXPECT_EQ(reward(contains, "The answer is 41.", "42", {}), 0.0);
  EXPECT_EQ(parse_reward_kind(to_string(RewardKind::normalized_contains)),
            RewardKind::normalized_contains);
  EXPECT_THROW(parse_reward_kind("bleu"), Error);
}

// Cross-check against the independent oracle on random responses.
TEST(Reward, AgreesWithOracle) {
  Rng rng(99);
  const std::vector<std::string> vocab{"yes", "No", "maybe", "\n", "\n\n", "ALPHA", "beta", "  "};
  const std::vector<pcotest::NaiveConstraint> naive{
      {"max_words", "4"}, {"min_words", "2"}, {"contains", "yes"}, {"not_contains", "beta"},
      {"paragraph_count", "2"}, {"all_lowercase", ""}, {"all_uppercase", ""}};
  for (int i = 0; i < 500; ++i) {
    std::string response;
    const std::size_t n = rng.below(10);
    for (std::size_t w = 0; w < n; ++w) response += vocab[rng.below(vocab.size())] + " ";
    std::vector<pcotest::NaiveConstraint> pick;
    std::vector<Constraint> cs;
    for (const auto& c : naive) {
      if (rng.below(2) == 0) continue;
      pick.push_back(c);
      cs.push_back(Constraint::parse(c.arg.empty() ? c.kind : c.kind + ":" + c.arg));
    }
    EXPECT_DOUBLE_EQ(reward(kCsr, response, "", cs), pcotest::naive_csr(pick, response))
        << response;
  }
}

TEST(TokenLength, ApproximationRoundsUp) {
  EXPECT_EQ(approx_token_length(""), 0u);
  EXPECT_EQ(approx_token_length("one"), 2u);
  EXPECT_EQ(approx_token_length("one two three"), 4u);
  EXPECT_EQ(approx_token_length("a b c d e f g h i"), 12u);
  EXPECT_EQ(prompt_token_length("a b c", TokenCountMode::approx), 4u);
}

TEST(TokenLength, BackendModeFallsBackWithoutCounter) {
  EXPECT_EQ(prompt_token_length("a b c", TokenCountMode::backend, nullptr), 4u);
  EXPECT_EQ(parse_token_count_mode("backend"), TokenCountMode::backend);
  EXPECT_THROW(parse_token_count_mode("exact"), Error);
}

Codebook book(std::vector<double> ema) {
  std::vector<Instinct> entries;
  for (std::size_t k = 0; k < ema.size(); ++k) entries.push_back({k, "t" + std::to_string(k), ema[k], 0, 0});
  return Codebook::from_parts(entries, std::vector<std::uint64_t>(ema.size(), 0));
}

StepRecord rec(std::size_t epoch, std::vector<std::size_t> route, double r, std::string prompt) {
  StepRecord s;
  s.epoch = epoch;
  s.route.indices = std::move(route);
  s.reward = r;
  s.prompt = std::move(prompt);
  return s;
}

TEST(Summary, CountsRoutesAndCurves) {
  const std::vector<StepRecord> log{rec(0, {0, 1}, 1.0, "a b c"), rec(0, {0, 2}, 0.0, "a"),
                                    rec(1, {0, 1}, 0.5, "a b c d e f")};
  const RunSummary s = summarize(log, book({0.2, 0.9, 0.5, 0.0}));
  EXPECT_EQ(s.steps, 3u);
  EXPECT_EQ(s.max_prompt_tokens, 8u);
  EXPECT_DOUBLE_EQ(s.mean_prompt_tokens, (4.0 + 2.0 + 8.0) / 3);
  EXPECT_NEAR(s.routing.entropy_bits, pcotest::entropy_bits({3, 2, 1, 0}), 1e-12);
  EXPECT_EQ(s.routing.unique_used, 3u);
  ASSERT_EQ(s.instincts.size(), 4u);
  EXPECT_EQ(s.instincts[0].index, 1u);
  EXPECT_EQ(s.instincts[0].usage, 2u);
  EXPECT_EQ(s.instincts[3].index, 3u);
  ASSERT_EQ(s.reward_curve.size(), 2u);
  EXPECT_EQ(s.reward_curve[0].steps, 2u);
  EXPECT_DOUBLE_EQ(s.reward_curve[0].mean_reward, 0.5);
  EXPECT_DOUBLE_EQ(s.reward_curve[1].mean_reward, 0.5);

  const auto j = nlohmann::json::parse(summary_json(s));
  EXPECT_EQ(j.at("steps"), 3);
  EXPECT_EQ(j.at("unique_used"), 3);
  const std::string table = summary_table(s);
  EXPECT_NE(table.find("Usage(n)"), std::string::npos);
  EXPECT_NE(table.find("MeanReward"), std::string::npos);
}

TEST(Summary, EmptyLog) {
  const RunSummary s = summarize({}, book({0.0, 0.0}));
  EXPECT_EQ(s.steps, 0u);
  EXPECT_EQ(s.routing.entropy_bits, 0.0);
  EXPECT_TRUE(s.reward_curve.empty());
}

}  // namespace
}  // namespace pco
