#include <gtest/gtest.h>

#include <mutex>
#include <random>

#include "bsm/errors.hpp"
#include "bsm/judge.hpp"
#include "bsm/mock_backend.hpp"
#include "test_support.hpp"

using namespace bsm;

namespace {

Verdict flipped(Verdict v) { return v == Verdict::A ? Verdict::B : v == Verdict::B ? Verdict::A : Verdict::Tie; }

// Records every prompt; plans three criteria and scores by a callback.
struct RecordingBackend {
  std::mutex mu;
  std::vector<std::string> prompts;
  test::FnBackend backend{[this](const CompletionRequest& r) {
    {
      std::lock_guard lock(mu);
      prompts.push_back(r.prompt);
    }
    if (r.prompt.find("Evaluation Plan:") != std::string::npos) return test::plan_text({"Relevance", "Clarity", "Depth"});
    if (r.prompt.find("Criterion 1:") != std::string::npos) return std::string("Final verdict: [[B]]");
    return test::score_text(3, 4);
  }};

  std::vector<std::string> matching(const std::string& needle) {
    std::vector<std::string> out;
    for (const auto& p : prompts) {
      if (p.find(needle) != std::string::npos) out.push_back(p);
    }
    return out;
  }
};

EvalSample turn2_sample() {
  auto s = test::turn1_sample("q2", "First question?", "A one.", "B one.");
  s.turn = 2;
  s.q2 = "Second question?";
  s.r2_a = "A two.";
  s.r2_b = "B two.";
  return s;
}

}  // namespace

TEST(CombineRuns, AllNineCombinations) {
  std::map<Verdict, int> counts;
  for (auto p1 : {Position::First, Position::Second, Position::Tie}) {
    for (auto p2 : {Position::First, Position::Second, Position::Tie}) ++counts[combine_runs(p1, p2)];
  }
  EXPECT_EQ(counts[Verdict::A], 1);
  EXPECT_EQ(counts[Verdict::B], 1);
  EXPECT_EQ(counts[Verdict::Tie], 7);
  EXPECT_EQ(combine_runs(Position::First, Position::Second), Verdict::A);
  EXPECT_EQ(combine_runs(Position::Second, Position::First), Verdict::B);
  EXPECT_EQ(combine_runs(Position::First, Position::First), Verdict::Tie);
}

TEST(AbsolutePreference, DependsOnOrder) {
  EXPECT_EQ(absolute_preference(EncodingOrder::AB, Position::First), Verdict::A);
  EXPECT_EQ(absolute_preference(EncodingOrder::BA, Position::First), Verdict::B);
  EXPECT_EQ(absolute_preference(EncodingOrder::BA, Position::Second), Verdict::A);
  EXPECT_EQ(absolute_preference(EncodingOrder::AB, Position::Tie), Verdict::Tie);
}

TEST(MergeSum, MatchesBruteForceOnRandomLists) {
  std::mt19937 rng(2024);
  Scale scale;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t k = 1 + rng() % 5;
    std::vector<CriterionJudgment> js;
    int first = 0, second = 0;
    for (std::size_t i = 0; i < k; ++i) {
      int f = 1 + static_cast<int>(rng() % 5), s = 1 + static_cast<int>(rng() % 5);
      first += f;
      second += s;
      js.push_back({{"c" + std::to_string(i), ""}, f, s, "", scale});
    }
    auto v = merge_sum(js);
    auto expected = first > second ? Position::First : first < second ? Position::Second : Position::Tie;
    ASSERT_EQ(v.verdict, expected);
    ASSERT_EQ(*v.total_first, first);
    ASSERT_EQ(*v.total_second, second);
  }
}

TEST(MergeSum, Preconditions) {
  EXPECT_THROW(merge_sum(std::span<const CriterionJudgment>{}), EmptyJudgments);
  std::vector<CriterionJudgment> mixed = {{{"a", ""}, 1, 2, "", Scale{1, 5}}, {{"b", ""}, 1, 2, "", Scale{1, 10}}};
  EXPECT_THROW(merge_sum(mixed), PreconditionViolation);
  std::vector<std::pair<double, double>> means = {{4.5, 4.0}, {3.0, 3.25}};
  EXPECT_EQ(merge_sum(means).verdict, Position::First);
}

TEST(JudgePair, HawaiiExamplePrefersB) {
  auto ex = test::hawaii_example();
  MockBackend backend(ex.script);
  JudgeConfig cfg;
  auto pj = judge_pair(ex.samples[0], cfg, backend);
  ASSERT_TRUE(pj.run1.plan);
  EXPECT_EQ(pj.run1.plan->criteria.size(), 4u);
  EXPECT_EQ(pj.run1.plan->criteria[0].title, "Relevance");
  EXPECT_EQ(*pj.run1.verdict.total_first, 16);
  EXPECT_EQ(*pj.run1.verdict.total_second, 19);
  EXPECT_EQ(pj.run1.verdict.verdict, Position::Second);
  EXPECT_EQ(pj.run2.verdict.verdict, Position::First);
  EXPECT_EQ(pj.verdict, Verdict::B);
  EXPECT_EQ(backend.call_count(), 10u);
}

TEST(JudgePair, SwapAntiSymmetryOnScriptedSamples) {
  auto pairs = test::random_scripted_pairs(100, 7);
  MockBackend backend(pairs.script);
  JudgeConfig cfg;
  cfg.parallelism = 4;
  std::map<Verdict, int> seen;
  for (const auto& s : pairs.samples) {
    auto forward = judge_pair(s, cfg, backend).verdict;
    auto backward = judge_pair(s.relabeled(), cfg, backend).verdict;
    EXPECT_EQ(backward, flipped(forward)) << s.id();
    ++seen[forward];
  }
  // The generator should exercise wins and ties.
  EXPECT_GT(seen[Verdict::Tie], 0);
  EXPECT_GT(seen[Verdict::A] + seen[Verdict::B], 0);
}

TEST(JudgePair, ParallelismDoesNotChangeResults) {
  auto pairs = test::random_scripted_pairs(20, 3);
  MockBackend backend(pairs.script);
  JudgeConfig serial, parallel;
  parallel.parallelism = 8;
  for (const auto& s : pairs.samples) {
    auto a = judge_pair(s, serial, backend);
    auto b = judge_pair(s, parallel, backend);
    EXPECT_EQ(a.verdict, b.verdict);
    EXPECT_EQ(a.run1.verdict.total_first, b.run1.verdict.total_first);
    EXPECT_EQ(a.run2.verdict.total_second, b.run2.verdict.total_second);
  }
}

TEST(JudgePair, SharedPlanSkipsSecondBranch) {
  auto ex = test::hawaii_example();
  MockBackend backend(ex.script);
  JudgeConfig cfg;
  cfg.share_branch_plan = true;
  auto pj = judge_pair(ex.samples[0], cfg, backend);
  EXPECT_EQ(backend.call_count(), 9u);
  EXPECT_TRUE(pj.run2.trace.branch_calls.empty());
  EXPECT_EQ(pj.run2.plan->criteria, pj.run1.plan->criteria);
  EXPECT_EQ(pj.verdict, Verdict::B);
}

TEST(JudgePair, BranchFailureSurfacesAsProgramError) {
  MockScript s;
  s.default_response = "no list here";
  MockBackend backend(s);
  try {
    judge_pair(test::turn1_sample("q", "Q?", "a", "b"), JudgeConfig{}, backend);
    FAIL();
  } catch (const ProgramError& e) {
    EXPECT_EQ(e.kind(), "ParseFailure");
    EXPECT_EQ(e.stage(), "branch");
  }
}

TEST(Prompts, BranchSeesQuestionOnlyAndSolveSeesReference) {
  RecordingBackend rec;
  auto s = test::turn1_sample("q", "What is 2+2?", "It is 4.", "It is 5.");
  s.category = "math";
  s.reference_answer = "4";
  judge_pair(s, JudgeConfig{}, rec.backend);
  auto branch = rec.matching("Evaluation Plan:");
  ASSERT_EQ(branch.size(), 2u);
  for (const auto& p : branch) {
    EXPECT_EQ(p.find("It is 4."), std::string::npos);
    EXPECT_EQ(p.find("Reference Answer"), std::string::npos);
    EXPECT_NE(p.find("up to five"), std::string::npos);
  }
  auto solves = rec.matching("[Evaluation Criterion]");
  ASSERT_EQ(solves.size(), 6u);
  for (const auto& p : solves) EXPECT_NE(p.find("[The Start of Reference Answer]\n4\n"), std::string::npos);
}

TEST(Prompts, SolveEncodesRequestedOrder) {
  auto s = test::turn1_sample("q", "Q?", "alpha text", "beta text");
  auto ab = render_conversation(s, EncodingOrder::AB, TemplateSet::builtin());
  auto ba = render_conversation(s, EncodingOrder::BA, TemplateSet::builtin());
  EXPECT_LT(ab.find("alpha text"), ab.find("beta text"));
  EXPECT_LT(ba.find("beta text"), ba.find("alpha text"));
  EXPECT_EQ(render_reference_block(s, TemplateSet::builtin()), "");
}

TEST(Prompts, TurnTwoConditionsOnBothTurns) {
  RecordingBackend rec;
  auto pj = judge_pair(turn2_sample(), JudgeConfig{}, rec.backend);
  auto branch = rec.matching("Evaluation Plan:");
  ASSERT_FALSE(branch.empty());
  EXPECT_NE(branch[0].find("First question?"), std::string::npos);
  EXPECT_NE(branch[0].find("Second question?"), std::string::npos);
  for (const auto& p : rec.matching("[Evaluation Criterion]")) {
    EXPECT_NE(p.find("A two."), std::string::npos);
    EXPECT_NE(p.find("B one."), std::string::npos);
  }
  // Constant (3, 4) scores favour whichever side is shown second.
  EXPECT_EQ(pj.verdict, Verdict::Tie);
}

TEST(MergeNeural, ParsesVerdictFromMergeCall) {
  RecordingBackend rec;
  JudgeConfig cfg;
  cfg.merge = MergeVariant::Neural;
  auto pj = judge_pair(test::turn1_sample("q", "Q?", "a", "b"), cfg, rec.backend);
  EXPECT_EQ(pj.run1.verdict.verdict, Position::Second);
  EXPECT_FALSE(pj.run1.verdict.total_first);
  auto merges = rec.matching("Criterion 1:");
  ASSERT_EQ(merges.size(), 2u);
  EXPECT_NE(merges[0].find("Clarity"), std::string::npos);
  EXPECT_EQ(pj.run1.trace.merge_calls.size(), 1u);
}

TEST(EvalSample, ValidationAndRelabel) {
  auto s = test::turn1_sample("q", "Q?", "a", "b", "m1", "m2");
  EXPECT_EQ(s.id(), "q:m1:m2:t1");
  auto r = s.relabeled();
  EXPECT_EQ(r.model_a, "m2");
  EXPECT_EQ(r.r1_a, "b");
  auto bad = s;
  bad.turn = 2;
  EXPECT_THROW(bad.validate(), SchemaError);
  bad = s;
  bad.model_b = "m1";
  EXPECT_THROW(bad.validate(), SchemaError);
}
