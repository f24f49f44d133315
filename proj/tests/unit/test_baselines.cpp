#include <gtest/gtest.h>

#include "bsm/baselines.hpp"
#include "bsm/errors.hpp"
#include "test_support.hpp"

using namespace bsm;

namespace {

EvalSample sample() { return test::turn1_sample("q", "Which is better?", "Answer one.", "Answer two."); }

// Relative verdict keyed on which answer is encoded first.
MockScript relative_script(const std::string& first_wins_text) {
  MockScript s;
  s.rules.push_back({{"[The Start of Assistant A's Answer]\nAnswer one.\n", "[[C]]"}, {}, {}, first_wins_text, {}});
  s.rules.push_back({{"[The Start of Assistant A's Answer]\nAnswer two.\n", "[[C]]"}, {}, {}, "I prefer [[B]]", {}});
  return s;
}

}  // namespace

TEST(MajorityVote, CountsAndTies) {
  using P = std::optional<Position>;
  std::vector<P> votes = {Position::First, Position::First, Position::Second};
  EXPECT_EQ(majority_vote(votes), Position::First);
  votes = {Position::First, Position::Second, std::nullopt};
  EXPECT_EQ(majority_vote(votes), Position::Tie);
  votes = {Position::Tie, Position::Tie, Position::First};
  EXPECT_EQ(majority_vote(votes), Position::Tie);
  votes = {std::nullopt, Position::Second};
  EXPECT_EQ(majority_vote(votes), Position::Second);
  votes = {std::nullopt};
  EXPECT_THROW(majority_vote(votes), VerdictParseFailure);
}

TEST(ZeroshotRelative, SwapProtocol) {
  MockBackend backend(relative_script("[[A]]"));
  auto pj = judge_with(sample(), JudgeConfig{}, {JudgeMethod::ZeroshotRelative}, backend);
  EXPECT_EQ(pj.run1.verdict.verdict, Position::First);
  EXPECT_EQ(pj.run2.verdict.verdict, Position::Second);
  EXPECT_EQ(pj.verdict, Verdict::A);
  EXPECT_EQ(pj.run1.trace.call_count(), 1u);
}

TEST(SelfConsistency, SingleSampleEqualsZeroshot) {
  for (const char* reply : {"[[A]]", "[[B]]", "[[C]]"}) {
    MockBackend backend(relative_script(reply));
    JudgeConfig cfg;
    for (auto order : {EncodingOrder::AB, EncodingOrder::BA}) {
      EXPECT_EQ(self_consistency(sample(), order, backend, cfg, 1, 0.7, 0).verdict.verdict,
                zeroshot_relative(sample(), order, backend, cfg).verdict.verdict);
    }
    EXPECT_EQ(judge_with(sample(), cfg, {JudgeMethod::SelfConsistency, 1}, backend).verdict,
              judge_with(sample(), cfg, {JudgeMethod::ZeroshotRelative}, backend).verdict);
  }
}

TEST(SelfConsistency, SeedsAndVotes) {
  MockScript s;
  // Seeds 10..14: First, Second, First, garbage, First.
  const char* replies[] = {"[[A]]", "[[B]]", "[[A]]", "unclear", "[[A]]"};
  for (int j = 0; j < 5; ++j) s.rules.push_back({{"[[C]]"}, {}, 10 + j, replies[j], {}});
  MockBackend backend(s);
  auto out = self_consistency(sample(), EncodingOrder::AB, backend, JudgeConfig{}, 5, 0.7, 10);
  ASSERT_EQ(out.votes.size(), 5u);
  EXPECT_FALSE(out.votes[3]);
  EXPECT_EQ(out.verdict.verdict, Position::First);
  EXPECT_EQ(out.trace.call_count(), 5u);
  for (std::size_t j = 0; j < 5; ++j) {
    const auto& d = out.trace.solve_calls.at(j).at(0).request.decoding;
    ASSERT_TRUE(std::holds_alternative<Sample>(d));
    EXPECT_EQ(std::get<Sample>(d).seed, 10 + static_cast<std::int64_t>(j));
  }
  EXPECT_THROW(self_consistency(sample(), EncodingOrder::AB, backend, JudgeConfig{}, 0, 0.7, 0), PreconditionViolation);
}

TEST(ZeroshotAbsolute, ScoresPerRun) {
  MockScript s;
  s.rules.push_back({{"[The Start of Assistant A's Answer]\nAnswer one.\n"}, {}, {}, "Assistant A: 5/5\nAssistant B: 2/5", {}});
  s.rules.push_back({{"[The Start of Assistant A's Answer]\nAnswer two.\n"}, {}, {}, "Assistant A: 2/5\nAssistant B: 5/5", {}});
  MockBackend backend(s);
  auto pj = judge_with(sample(), JudgeConfig{}, {JudgeMethod::ZeroshotAbsolute}, backend);
  EXPECT_EQ(*pj.run1.verdict.total_first, 5);
  EXPECT_EQ(pj.verdict, Verdict::A);
}

TEST(PlanAndSolve, UsesConcludingTotals) {
  MockScript s;
  s.rules.push_back({{"[The Start of Assistant A's Answer]\nAnswer one.\n"},
                     {},
                     {},
                     "Plan:\n1. Accuracy\n2. Style\nAccuracy: A 4/5, B 3/5\nStyle: A 2/5, B 5/5\n"
                     "Total A: 6, Total B: 8",
                     {}});
  s.rules.push_back({{"[The Start of Assistant A's Answer]\nAnswer two.\n"},
                     {},
                     {},
                     "Totals so far are unclear.\nTotal A: 8, Total B: 6\nThat is my total.",
                     {}});
  MockBackend backend(s);
  auto pj = judge_with(sample(), JudgeConfig{}, {JudgeMethod::PlanAndSolve}, backend);
  EXPECT_EQ(*pj.run1.verdict.total_first, 6);
  EXPECT_EQ(*pj.run1.verdict.total_second, 8);
  EXPECT_EQ(pj.run1.verdict.verdict, Position::Second);
  EXPECT_EQ(pj.run2.verdict.verdict, Position::First);
  EXPECT_EQ(pj.verdict, Verdict::B);

  MockScript none;
  none.default_response = "I cannot decide.";
  MockBackend empty(none);
  EXPECT_THROW(plan_and_solve(sample(), EncodingOrder::AB, empty, JudgeConfig{}), ScoreParseFailure);
}

TEST(BsmSc, SingleSampleEqualsBsm) {
  auto pairs = test::random_scripted_pairs(30, 5);
  MockBackend backend(pairs.script);
  JudgeConfig cfg;
  for (const auto& s : pairs.samples) {
    auto plain = judge_pair(s, cfg, backend);
    auto sc = bsm_sc(s, backend, 1, 0.7, cfg);
    EXPECT_EQ(sc.verdict, plain.verdict) << s.id();
    EXPECT_EQ(sc.run1.verdict.verdict, plain.run1.verdict.verdict);
    EXPECT_EQ(sc.run2.verdict.verdict, plain.run2.verdict.verdict);
  }
}

TEST(BsmSc, AveragesSampledScores) {
  MockScript s;
  s.rules.push_back({{"Evaluation Plan:"}, {}, {}, test::plan_text({"Only"}), {}});
  // Per-seed scores for the AB run: means (4, 3); one sample unparseable.
  s.rules.push_back({{"Answer one.\n[The End of Assistant A"}, {}, 0, test::score_text(5, 2), {}});
  s.rules.push_back({{"Answer one.\n[The End of Assistant A"}, {}, 1, test::score_text(3, 4), {}});
  s.rules.push_back({{"Answer one.\n[The End of Assistant A"}, {}, 2, "no scores", {}});
  s.rules.push_back({{"Answer two.\n[The End of Assistant A"}, {}, {}, test::score_text(3, 3), {}});
  MockBackend backend(s);
  auto run = run_bsm_sc(sample(), EncodingOrder::AB, backend, JudgeConfig{}, 3, 0.7, 0);
  ASSERT_EQ(run.averaged.size(), 1u);
  EXPECT_DOUBLE_EQ(run.averaged[0].mean_first, 4.0);
  EXPECT_DOUBLE_EQ(run.averaged[0].mean_second, 3.0);
  EXPECT_EQ(run.averaged[0].failed_samples, 1u);
  EXPECT_EQ(run.verdict.verdict, Position::First);
}

TEST(JudgeMethod, NamesRoundTrip) {
  for (auto m : {JudgeMethod::Bsm, JudgeMethod::ZeroshotRelative, JudgeMethod::ZeroshotAbsolute,
                 JudgeMethod::PlanAndSolve, JudgeMethod::SelfConsistency, JudgeMethod::BsmSc}) {
    EXPECT_EQ(judge_method_from_string(to_string(m)), m);
  }
  EXPECT_THROW(judge_method_from_string("nope"), ConfigError);
}
