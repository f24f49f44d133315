#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include "bsm/errors.hpp"
#include "bsm/mock_backend.hpp"
#include "bsm/program.hpp"

using namespace bsm;

namespace {

MockBackend echo() {
  MockScript s;
  s.default_response = "ok";
  return MockBackend(s);
}

}  // namespace

TEST(RunProgram, MergesInBranchOrderDespiteCompletionOrder) {
  auto backend = echo();
  auto run = run_program(
      5, backend,
      [](int n, ModuleContext& ctx) {
        complete(ctx, {"plan", Greedy{}, 8, "m"});
        std::vector<int> subs;
        for (int i = 0; i < n; ++i) subs.push_back(i);
        return subs;
      },
      [](int sub, std::size_t idx, ModuleContext& ctx) {
        // Later branches finish first.
        std::this_thread::sleep_for(std::chrono::milliseconds(5 * (5 - sub)));
        complete(ctx, {"solve " + std::to_string(idx), Greedy{}, 8, "m"});
        return sub * 10;
      },
      [](std::vector<int> sols, ModuleContext& ctx) {
        complete(ctx, {"merge", Greedy{}, 8, "m"});
        return sols;
      },
      ProgramOptions{4, {}});
  EXPECT_EQ(run.output, (std::vector<int>{0, 10, 20, 30, 40}));
  EXPECT_EQ(run.trace.branch_count, 5u);
  EXPECT_EQ(run.trace.branch_calls.size(), 1u);
  EXPECT_EQ(run.trace.merge_calls.size(), 1u);
  for (std::size_t i = 0; i < 5; ++i) {
    ASSERT_EQ(run.trace.solve_calls.at(i).size(), 1u);
    EXPECT_EQ(run.trace.solve_calls.at(i)[0].request.prompt, "solve " + std::to_string(i));
  }
  EXPECT_EQ(run.trace.call_count(), 7u);
  EXPECT_TRUE(run.trace.complete);
}

TEST(RunProgram, SolvesActuallyOverlap) {
  auto backend = echo();
  std::atomic<int> live{0}, peak{0};
  run_program(
      0, backend, [](int, ModuleContext&) { return std::vector<int>{0, 1, 2, 3}; },
      [&](int, std::size_t, ModuleContext&) {
        int now = ++live;
        for (int p = peak.load(); now > p && !peak.compare_exchange_weak(p, now);) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
        --live;
        return 0;
      },
      [](std::vector<int>, ModuleContext&) { return 0; }, ProgramOptions{4, {}});
  EXPECT_GT(peak.load(), 1);
}

TEST(RunProgram, EmptyBranchRaises) {
  auto backend = echo();
  try {
    run_program(
        0, backend, [](int, ModuleContext&) { return std::vector<int>{}; },
        [](int, std::size_t, ModuleContext&) { return 0; }, [](std::vector<int>, ModuleContext&) { return 0; });
    FAIL();
  } catch (const ProgramError& e) {
    EXPECT_EQ(e.kind(), "BranchEmpty");
    EXPECT_EQ(e.stage(), "branch");
  }
}

TEST(RunProgram, MaxBranchesTruncates) {
  auto backend = echo();
  auto run = run_program(
      0, backend, [](int, ModuleContext&) { return std::vector<int>{1, 2, 3, 4, 5, 6, 7}; },
      [](int s, std::size_t, ModuleContext&) { return s; },
      [](std::vector<int> v, ModuleContext&) { return v.size(); }, ProgramOptions{1, 5});
  EXPECT_EQ(run.output, 5u);
}

TEST(RunProgram, ReportsLowestFailingBranchWithTrace) {
  auto backend = echo();
  try {
    run_program(
        0, backend, [](int, ModuleContext&) { return std::vector<int>{0, 1, 2, 3}; },
        [](int s, std::size_t, ModuleContext& ctx) {
          complete(ctx, {"solve", Greedy{}, 8, "m"});
          if (s == 1) throw ScoreParseFailure("branch one");
          if (s == 3) throw VerdictParseFailure("branch three");
          return s;
        },
        [](std::vector<int>, ModuleContext&) { return 0; }, ProgramOptions{4, {}});
    FAIL();
  } catch (const ProgramError& e) {
    EXPECT_EQ(e.kind(), "ScoreParseFailure");
    EXPECT_EQ(e.stage(), "solve");
    EXPECT_EQ(e.branch_index(), 1u);
    EXPECT_FALSE(e.trace().complete);
    EXPECT_EQ(e.trace().solve_calls.size(), 4u);
  }
}

TEST(RunProgram, NonLibraryErrorsBecomeInternal) {
  auto backend = echo();
  try {
    run_program(
        0, backend, [](int, ModuleContext&) { return std::vector<int>{0}; },
        [](int, std::size_t, ModuleContext&) -> int { throw std::runtime_error("boom"); },
        [](std::vector<int>, ModuleContext&) { return 0; });
    FAIL();
  } catch (const ProgramError& e) {
    EXPECT_EQ(e.kind(), "InternalError");
  }
}

TEST(RunProgram, FailedCallIsRecorded) {
  MockScript s;
  s.rules.push_back({{"solve"}, {}, {}, "down", std::string("transport")});
  MockBackend backend(s);
  try {
    run_program(
        0, backend, [](int, ModuleContext&) { return std::vector<int>{0}; },
        [](int, std::size_t, ModuleContext& ctx) { return complete(ctx, {"solve", Greedy{}, 8, "m"}).text; },
        [](std::vector<std::string>, ModuleContext&) { return 0; });
    FAIL();
  } catch (const ProgramError& e) {
    EXPECT_EQ(e.kind(), "TransportError");
    const auto& rec = e.trace().solve_calls.at(0).at(0);
    EXPECT_FALSE(rec.result);
    EXPECT_EQ(rec.error_kind, "TransportError");
  }
}

TEST(ProgramTrace, JsonHasAllStages) {
  auto backend = echo();
  auto run = run_program(
      0, backend,
      [](int, ModuleContext& ctx) {
        complete(ctx, {"b", Greedy{}, 8, "m"});
        return std::vector<int>{0, 1};
      },
      [](int, std::size_t, ModuleContext& ctx) { return complete(ctx, {"s", Greedy{}, 8, "m"}).text; },
      [](std::vector<std::string> v, ModuleContext&) { return v.size(); });
  auto j = run.trace.to_json();
  EXPECT_EQ(j["branch_count"], 2);
  EXPECT_EQ(j["branch"].size(), 1u);
  EXPECT_EQ(j["solve"].size(), 2u);
  EXPECT_TRUE(j["merge"].empty());
}
