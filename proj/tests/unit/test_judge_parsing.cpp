#include <gtest/gtest.h>

#include <random>

#include "bsm/errors.hpp"
#include "bsm/judge.hpp"
#include "test_support.hpp"

using namespace bsm;

TEST(ParseCriteria, NumberedLinesWithDescriptions) {
  auto c = parse_criteria(
      "Here is the plan:\n"
      "1. Relevance: Does it answer the question?\n"
      "2) **Clarity** - Is it easy to follow?\n"
      "3: Accuracy\n"
      "   Check facts carefully.\n",
      5);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0], (Criterion{"Relevance", "Does it answer the question?"}));
  EXPECT_EQ(c[1], (Criterion{"Clarity", "Is it easy to follow?"}));
  EXPECT_EQ(c[2], (Criterion{"Accuracy", "Check facts carefully."}));
}

TEST(ParseCriteria, BulletsAndNestedDetail) {
  auto c = parse_criteria(
      "- Depth: level of detail\n"
      "* Creativity: novelty\n"
      "\xE2\x80\xA2 Tone: fit for a blog\n",
      5);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[2].title, "Tone");
  auto nested = parse_criteria("1. Accuracy: facts\n   - dates are right\n   - names are right\n2. Style: prose\n", 5);
  ASSERT_EQ(nested.size(), 2u);
  EXPECT_EQ(nested[0].description, "facts dates are right names are right");
}

TEST(ParseCriteria, TruncatesToMaxK) {
  auto c = parse_criteria(test::plan_text({"a", "b", "c", "d", "e", "f", "g"}), 5);
  ASSERT_EQ(c.size(), 5u);
  EXPECT_EQ(c.back().title, "e");
}

TEST(ParseCriteria, NoListIsFailure) {
  EXPECT_THROW(parse_criteria("I think both responses are fine.", 5), ParseFailure);
  EXPECT_THROW(parse_criteria("", 5), ParseFailure);
  EXPECT_THROW(parse_criteria("**Bold** heading only", 5), ParseFailure);
}

// Any plan of 1..10 criteria yields between 1 and max_k criteria.
TEST(ParseCriteria, CountPropertyOverRandomPlans) {
  std::mt19937 rng(11);
  const std::vector<std::string> styles = {"{}. {}: d", "{}) {}: d", "- {}: d"};
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = 1 + rng() % 10;
    std::size_t max_k = 1 + rng() % 5;
    const auto& style = styles[rng() % styles.size()];
    std::string text = rng() % 2 ? "Plan:\n" : "";
    for (std::size_t i = 0; i < n; ++i) {
      auto title = fmt::format("Criterion{}", i);
      text += style == "- {}: d" ? fmt::format("- {}: d\n", title) : fmt::format(fmt::runtime(style), i + 1, title) + "\n";
    }
    auto c = parse_criteria(text, max_k);
    EXPECT_GE(c.size(), 1u);
    EXPECT_EQ(c.size(), std::min(n, max_k));
  }
}

TEST(ParseScores, LabelledForms) {
  Scale s;
  EXPECT_EQ(parse_scores("Assistant A: 4/5\nAssistant B: 2/5", s), std::make_pair(4, 2));
  EXPECT_EQ(parse_scores("Assistant A receives a score of 3 while Assistant B gets 5", s), std::make_pair(3, 5));
  EXPECT_EQ(parse_scores("B: 1\nA: 5", s), std::make_pair(5, 1));
  EXPECT_EQ(parse_scores("Response A - 2; Response B - 2", s), std::make_pair(2, 2));
}

TEST(ParseScores, FractionsAndTrailingIntegers) {
  Scale s;
  EXPECT_EQ(parse_scores("The first earns 4 out of 5 and the second 3 out of 5.", s), std::make_pair(4, 3));
  EXPECT_EQ(parse_scores("Scores:\n4\n2", s), std::make_pair(4, 2));
  EXPECT_EQ(parse_scores("Scores 9/10 and 3/10 on a 1-10 scale", Scale{1, 10}), std::make_pair(9, 3));
}

TEST(ParseScores, Failures) {
  Scale s;
  EXPECT_THROW(parse_scores("no numbers here", s), ScoreParseFailure);
  EXPECT_THROW(parse_scores("only 3", s), ScoreParseFailure);
  EXPECT_THROW(parse_scores("Assistant A: 7\nAssistant B: 2", s), ScoreOutOfRange);
  EXPECT_THROW(parse_scores("Assistant A: 0\nAssistant B: 2", s), ScoreOutOfRange);
}

TEST(ParseVerdict, Tokens) {
  EXPECT_EQ(parse_verdict("Reasoning...\n[[A]]"), Position::First);
  EXPECT_EQ(parse_verdict("[[B]]"), Position::Second);
  EXPECT_EQ(parse_verdict("[[C]]"), Position::Tie);
  EXPECT_EQ(parse_verdict("Mentions [[A]] then decides [[B]]"), Position::Second);
  EXPECT_EQ(parse_verdict("Final verdict: Assistant A"), Position::First);
  EXPECT_EQ(parse_verdict("B"), Position::Second);
  EXPECT_EQ(parse_verdict("Assistant B is better overall."), Position::Second);
  EXPECT_EQ(parse_verdict("It is a tie."), Position::Tie);
}

TEST(ParseVerdict, UnparseableThrows) {
  EXPECT_THROW(parse_verdict("no judgment"), VerdictParseFailure);
  EXPECT_THROW(parse_verdict("Assistant A is better. Assistant B is better."), VerdictParseFailure);
}

TEST(Labels, RoundTripAndCountWords) {
  for (auto v : {Verdict::A, Verdict::B, Verdict::Tie}) EXPECT_EQ(verdict_from_string(to_string(v)), v);
  for (auto p : {Position::First, Position::Second, Position::Tie}) EXPECT_EQ(position_from_string(to_string(p)), p);
  EXPECT_EQ(count_word(5), "five");
  EXPECT_EQ(count_word(12), "12");
}
