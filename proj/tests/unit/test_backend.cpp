#include <gtest/gtest.h>

#include <thread>

#include "bsm/backend.hpp"
#include "bsm/errors.hpp"
#include "bsm/mock_backend.hpp"
#include "test_support.hpp"

using namespace bsm;
using nlohmann::json;

TEST(CompletionRequest, RejectsEmptyPrompt) {
  CompletionRequest r{"", Greedy{}, 16, "m"};
  EXPECT_THROW(r.validate(), EmptyPrompt);
  MockBackend mock(MockScript{});
  EXPECT_THROW(complete(mock, r), EmptyPrompt);
  EXPECT_EQ(mock.call_count(), 0u);
}

TEST(CompletionRequest, RejectsBadDecodingAndLimits) {
  EXPECT_THROW((CompletionRequest{"p", Greedy{}, 0, "m"}.validate()), InvalidRequest);
  EXPECT_THROW((CompletionRequest{"p", Sample{0.0, 1}, 16, "m"}.validate()), InvalidRequest);
  EXPECT_THROW((CompletionRequest{"p", Sample{2.5, 1}, 16, "m"}.validate()), InvalidRequest);
  EXPECT_NO_THROW((CompletionRequest{"p", Sample{0.7, 1}, 16, "m"}.validate()));
}

TEST(CompletionRequest, JsonRoundTrip) {
  CompletionRequest greedy{"hello", Greedy{}, 512, "model-x"};
  CompletionRequest sampled{"hello", Sample{0.7, 42}, 1024, "model-x"};
  EXPECT_EQ(request_from_json(request_to_json(greedy)), greedy);
  EXPECT_EQ(request_from_json(request_to_json(sampled)), sampled);
  EXPECT_NE(request_to_json(greedy), request_to_json(sampled));
}

TEST(MockBackend, FirstMatchingRuleWins) {
  MockScript s;
  s.rules.push_back({{"alpha", "beta"}, {}, {}, "both", {}});
  s.rules.push_back({{"alpha"}, {}, {}, "alpha only", {}});
  s.rules.push_back({{}, std::string("gam+a"), {}, "regex", {}});
  s.default_response = "fallback";
  MockBackend mock(s);
  auto ask = [&](const std::string& p) { return complete(mock, {p, Greedy{}, 16, "m"}).text; };
  EXPECT_EQ(ask("alpha and beta"), "both");
  EXPECT_EQ(ask("alpha"), "alpha only");
  EXPECT_EQ(ask("gammmma"), "regex");
  EXPECT_EQ(ask("nothing"), "fallback");
  EXPECT_EQ(mock.call_count(), 4u);
}

TEST(MockBackend, SeedRulesOnlyMatchSampledRequests) {
  MockScript s;
  s.rules.push_back({{"vote"}, {}, 3, "seeded three", {}});
  s.rules.push_back({{"vote"}, {}, {}, "any", {}});
  MockBackend mock(s);
  EXPECT_EQ(complete(mock, {"vote", Sample{0.7, 3}, 16, "m"}).text, "seeded three");
  EXPECT_EQ(complete(mock, {"vote", Sample{0.7, 4}, 16, "m"}).text, "any");
  EXPECT_EQ(complete(mock, {"vote", Greedy{}, 16, "m"}).text, "any");
}

TEST(MockBackend, ScriptedFailures) {
  MockScript s;
  s.rules.push_back({{"net"}, {}, {}, "", std::string("transport")});
  s.rules.push_back({{"deny"}, {}, {}, "", std::string("refusal")});
  MockBackend mock(s);
  EXPECT_THROW(complete(mock, {"net down", Greedy{}, 16, "m"}), TransportError);
  EXPECT_THROW(complete(mock, {"deny me", Greedy{}, 16, "m"}), BackendRefusal);
}

TEST(MockBackend, ScriptJsonForms) {
  auto j = json::parse(R"({
    "rules": [
      {"contains": "one", "response": "1"},
      {"contains": ["two", "three"], "response": "23"},
      {"regex": "^fo+ur", "seed": 9, "response": "4"}
    ],
    "default": "d"
  })");
  auto s = MockScript::from_json(j);
  ASSERT_EQ(s.rules.size(), 3u);
  EXPECT_EQ(s.rules[1].contains, (std::vector<std::string>{"two", "three"}));
  EXPECT_EQ(*s.rules[2].seed, 9);
  EXPECT_EQ(MockScript::from_json(s.to_json()).to_json(), s.to_json());
  EXPECT_THROW(MockBackend(MockScript::from_json(json::parse(R"({"rules": [{"regex": "(", "response": ""}]})"))),
               ConfigError);
}

TEST(MockBackend, LoadsFixtureScripts) {
  EXPECT_GT(MockScript::load(test::fixture("judge_mock.json")).rules.size(), 0u);
  EXPECT_GT(MockScript::load(test::fixture("story_mock.json")).rules.size(), 0u);
  EXPECT_THROW(MockScript::load(test::fixture("missing.json")), ConfigError);
}

TEST(MockBackend, RepliesDoNotDependOnCallOrder) {
  MockScript s;
  for (int i = 0; i < 50; ++i) s.rules.push_back({{"key" + std::to_string(i) + ";"}, {}, {}, std::to_string(i), {}});
  MockBackend mock(s);
  std::vector<std::string> got(200);
  std::vector<std::jthread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = t; i < 200; i += 4) got[i] = complete(mock, {"key" + std::to_string(i % 50) + ";", Greedy{}, 8, "m"}).text;
    });
  }
  threads.clear();
  for (int i = 0; i < 200; ++i) EXPECT_EQ(got[i], std::to_string(i % 50));
  EXPECT_EQ(mock.call_count(), 200u);
}

TEST(Errors, KindsAreStable) {
  EXPECT_EQ(ScoreParseFailure("x").kind(), "ScoreParseFailure");
  EXPECT_EQ(TransportError("x", 3).kind(), "TransportError");
  EXPECT_EQ(BackendRefusal(400, "bad").kind(), "BackendRefusal");
  EXPECT_EQ(SchemaError("x", 7).line(), 7u);
}
