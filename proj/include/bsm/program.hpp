#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "bsm/backend.hpp"
#include "bsm/errors.hpp"
#include "bsm/parallel.hpp"

namespace bsm {

std::int64_t now_ms();

/// One backend exchange made by a module.
struct CallRecord {
  CompletionRequest request;
  std::optional<CompletionResult> result;
  std::string error_kind;
  std::string error_message;
  std::int64_t started_ms = 0;
  std::int64_t finished_ms = 0;
};

/// Audit record of one branch -> solve -> merge execution. Solve calls are
/// keyed by branch index 0..k-1.
struct ProgramTrace {
  std::vector<CallRecord> branch_calls;
  std::map<std::size_t, std::vector<CallRecord>> solve_calls;
  std::vector<CallRecord> merge_calls;
  std::size_t branch_count = 0;
  std::int64_t started_ms = 0;
  std::int64_t finished_ms = 0;
  bool complete = false;

  std::size_t call_count() const;
  nlohmann::json to_json() const;
};

/// Backend handle given to a module; every call it makes lands in one trace
/// slot. Safe for concurrent use within a module.
class ModuleContext final : public Backend {
 public:
  ModuleContext(Backend& backend, std::vector<CallRecord>& sink, std::optional<std::size_t> branch_index = {})
      : backend_(backend), sink_(sink), branch_index_(branch_index) {}

  CompletionResult complete(const CompletionRequest& request) override;
  std::string id() const override { return backend_.id(); }

  std::optional<std::size_t> branch_index() const { return branch_index_; }

 private:
  Backend& backend_;
  std::vector<CallRecord>& sink_;
  std::optional<std::size_t> branch_index_;
  std::mutex mutex_;
};

/// A module failure inside run_program. `kind()` is the kind of the
/// underlying error; the partial trace is kept.
class ProgramError : public Error {
 public:
  ProgramError(std::string kind, std::string stage, std::optional<std::size_t> branch_index,
               const std::string& message, std::shared_ptr<const ProgramTrace> trace)
      : Error(std::move(kind), stage + (branch_index ? " [branch " + std::to_string(*branch_index) + "]" : "") +
                                   ": " + message),
        stage_(std::move(stage)),
        branch_index_(branch_index),
        trace_(std::move(trace)) {}

  const std::string& stage() const { return stage_; }
  std::optional<std::size_t> branch_index() const { return branch_index_; }
  const ProgramTrace& trace() const { return *trace_; }

 private:
  std::string stage_;
  std::optional<std::size_t> branch_index_;
  std::shared_ptr<const ProgramTrace> trace_;
};

struct ProgramOptions {
  std::size_t parallelism = 1;
  /// Upper bound on k; extra sub-problems are dropped.
  std::optional<std::size_t> max_branches;
};

template <class Output>
struct ProgramRun {
  Output output;
  ProgramTrace trace;
};

namespace detail {

[[noreturn]] void raise_module_error(std::exception_ptr error, const std::string& stage,
                                     std::optional<std::size_t> branch_index, const ProgramTrace& trace);

}  // namespace detail

/// Executes Prog(x, branch, solve, merge) -> y.
///
///   branch(input, ctx)              -> std::vector<SubProblem>
///   solve(sub_problem, index, ctx)  -> Solution
///   merge(std::vector<Solution>, ctx) -> Output
///
/// Solves run independently (up to `parallelism` at once) and merge receives
/// the solutions in branch-index order regardless of completion order.
template <class Input, class BranchFn, class SolveFn, class MergeFn>
auto run_program(const Input& input, Backend& backend, BranchFn&& branch, SolveFn&& solve, MergeFn&& merge,
                 const ProgramOptions& options = {}) {
  using SubProblem = typename std::invoke_result_t<BranchFn&, const Input&, ModuleContext&>::value_type;
  using Solution = std::invoke_result_t<SolveFn&, const SubProblem&, std::size_t, ModuleContext&>;
  using Output = std::invoke_result_t<MergeFn&, std::vector<Solution>, ModuleContext&>;

  ProgramTrace trace;
  trace.started_ms = now_ms();

  std::vector<SubProblem> subs;
  try {
    ModuleContext ctx(backend, trace.branch_calls);
    subs = branch(input, ctx);
  } catch (...) {
    detail::raise_module_error(std::current_exception(), "branch", std::nullopt, trace);
  }
  if (options.max_branches && subs.size() > *options.max_branches) subs.resize(*options.max_branches);
  if (subs.empty()) {
    detail::raise_module_error(std::make_exception_ptr(BranchEmpty("branch produced no sub-problems")), "branch",
                               std::nullopt, trace);
  }
  trace.branch_count = subs.size();
  for (std::size_t i = 0; i < subs.size(); ++i) trace.solve_calls[i];

  std::vector<std::optional<Solution>> solutions(subs.size());
  auto errors = parallel_for(subs.size(), options.parallelism, [&](std::size_t i) {
    ModuleContext ctx(backend, trace.solve_calls.at(i), i);
    solutions[i].emplace(solve(subs[i], i, ctx));
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i]) detail::raise_module_error(errors[i], "solve", i, trace);
  }

  std::vector<Solution> ordered;
  ordered.reserve(solutions.size());
  for (auto& s : solutions) ordered.push_back(std::move(*s));

  std::optional<Output> output;
  try {
    ModuleContext ctx(backend, trace.merge_calls);
    output.emplace(merge(std::move(ordered), ctx));
  } catch (...) {
    detail::raise_module_error(std::current_exception(), "merge", std::nullopt, trace);
  }
  trace.finished_ms = now_ms();
  trace.complete = true;
  return ProgramRun<Output>{std::move(*output), std::move(trace)};
}

}  // namespace bsm
