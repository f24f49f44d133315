#include "bsm/baselines.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "bsm/errors.hpp"

namespace bsm {

std::string to_string(JudgeMethod m) {
  switch (m) {
    case JudgeMethod::Bsm: return "bsm";
    case JudgeMethod::ZeroshotRelative: return "zeroshot_relative";
    case JudgeMethod::ZeroshotAbsolute: return "zeroshot_absolute";
    case JudgeMethod::PlanAndSolve: return "plan_and_solve";
    case JudgeMethod::SelfConsistency: return "self_consistency";
    case JudgeMethod::BsmSc: return "bsm_sc";
  }
  return "bsm";
}

JudgeMethod judge_method_from_string(std::string_view s) {
  for (auto m : {JudgeMethod::Bsm, JudgeMethod::ZeroshotRelative, JudgeMethod::ZeroshotAbsolute,
                 JudgeMethod::PlanAndSolve, JudgeMethod::SelfConsistency, JudgeMethod::BsmSc}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown judge method '" + std::string(s) + "'");
}

namespace {

std::string focus_text(const EvalSample& sample) {
  return sample.turn == 1
             ? "the responses provided by two AI assistants to the user question displayed below"
             : "the responses provided by two AI assistants to the second user question in the conversations below";
}

Bindings common_bindings(const EvalSample& sample, EncodingOrder order, const JudgeConfig& config) {
  const auto& t = config.tmpl();
  return {{"conversation", render_conversation(sample, order, t)},
          {"reference_block", render_reference_block(sample, t)},
          {"focus", focus_text(sample)},
          {"scale_lo", std::to_string(config.scale.lo)},
          {"scale_hi", std::to_string(config.scale.hi)},
          {"max_k_words", count_word(config.max_k)}};
}

/// Runs `body` with calls recorded under solve slot 0, as a one-branch trace.
template <class Body>
RunOutcome single_call_run(EncodingOrder order, Backend& backend, Body&& body) {
  RunOutcome out;
  out.order = order;
  out.trace.started_ms = now_ms();
  out.trace.branch_count = 1;
  ModuleContext ctx(backend, out.trace.solve_calls[0], 0);
  out.verdict = body(ctx);
  out.trace.finished_ms = now_ms();
  out.trace.complete = true;
  return out;
}

RunVerdict from_scores(int first, int second) {
  RunVerdict v;
  v.total_first = first;
  v.total_second = second;
  v.verdict = first > second ? Position::First : second > first ? Position::Second : Position::Tie;
  return v;
}

bool is_parse_error(const Error& e) {
  return e.kind() == "ScoreParseFailure" || e.kind() == "ScoreOutOfRange" || e.kind() == "VerdictParseFailure";
}

}  // namespace

RunOutcome zeroshot_relative(const EvalSample& sample, EncodingOrder order, Backend& backend,
                             const JudgeConfig& config, const Decoding& decoding) {
  sample.validate();
  auto prompt = config.tmpl().render("judge_zeroshot_relative", common_bindings(sample, order, config));
  return single_call_run(order, backend, [&](Backend& b) {
    auto result = complete(b, {prompt, decoding, config.solve_max_tokens, config.model_id});
    RunVerdict v;
    v.verdict = parse_verdict(result.text);
    return v;
  });
}

RunOutcome zeroshot_absolute(const EvalSample& sample, EncodingOrder order, Backend& backend,
                             const JudgeConfig& config) {
  sample.validate();
  auto prompt = config.tmpl().render("judge_zeroshot_absolute", common_bindings(sample, order, config));
  return single_call_run(order, backend, [&](Backend& b) {
    auto result = complete(b, {prompt, Greedy{}, config.solve_max_tokens, config.model_id});
    auto [first, second] = parse_scores(result.text, config.scale);
    return from_scores(first, second);
  });
}

RunOutcome plan_and_solve(const EvalSample& sample, EncodingOrder order, Backend& backend, const JudgeConfig& config) {
  sample.validate();
  auto prompt = config.tmpl().render("judge_plan_and_solve", common_bindings(sample, order, config));
  const Scale totals{config.scale.lo, config.scale.hi * static_cast<int>(config.max_k)};
  return single_call_run(order, backend, [&](Backend& b) {
    auto result = complete(b, {prompt, Greedy{}, config.solve_max_tokens, config.model_id});
    std::string lowered = result.text;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char c) { return std::tolower(c); });
    std::vector<std::size_t> marks;
    for (auto p = lowered.find("total"); p != std::string::npos; p = lowered.find("total", p + 1)) marks.push_back(p);
    // Walk back from the last "total" until a suffix yields both totals.
    for (auto it = marks.rbegin(); it != marks.rend(); ++it) {
      try {
        auto [first, second] = parse_scores(std::string_view(result.text).substr(*it), totals);
        return from_scores(first, second);
      } catch (const ScoreParseFailure&) {
      }
    }
    throw ScoreParseFailure("plan-and-solve completion has no concluding totals");
  });
}

Position majority_vote(std::span<const std::optional<Position>> votes) {
  std::array<std::size_t, 3> counts{};
  std::size_t parsed = 0;
  for (const auto& v : votes) {
    if (!v) continue;
    ++counts[static_cast<std::size_t>(*v)];
    ++parsed;
  }
  if (parsed == 0) throw VerdictParseFailure("no self-consistency sample produced a parseable verdict");
  auto top = *std::max_element(counts.begin(), counts.end());
  if (std::count(counts.begin(), counts.end(), top) > 1) return Position::Tie;
  return static_cast<Position>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

RunOutcome self_consistency(const EvalSample& sample, EncodingOrder order, Backend& backend,
                            const JudgeConfig& config, std::size_t n, double temperature, std::int64_t seed) {
  if (n < 1) throw PreconditionViolation("self-consistency needs at least one sample");
  sample.validate();
  auto prompt = config.tmpl().render("judge_zeroshot_relative", common_bindings(sample, order, config));

  RunOutcome out;
  out.order = order;
  out.trace.started_ms = now_ms();
  out.trace.branch_count = n;
  for (std::size_t j = 0; j < n; ++j) out.trace.solve_calls[j];
  out.votes.assign(n, std::nullopt);

  auto errors = parallel_for(n, config.parallelism, [&](std::size_t j) {
    ModuleContext ctx(backend, out.trace.solve_calls.at(j), j);
    auto result = complete(ctx, {prompt, Sample{temperature, seed + static_cast<std::int64_t>(j)},
                                 config.solve_max_tokens, config.model_id});
    try {
      out.votes[j] = parse_verdict(result.text);
    } catch (const VerdictParseFailure&) {
    }
  });
  rethrow_first(errors);
  out.verdict.verdict = majority_vote(out.votes);
  out.trace.finished_ms = now_ms();
  out.trace.complete = true;
  return out;
}

RunOutcome run_bsm_sc(const EvalSample& sample, EncodingOrder order, Backend& backend, const JudgeConfig& config,
                      std::size_t n, double temperature, std::int64_t seed) {
  if (n < 1) throw PreconditionViolation("bsm_sc needs at least one sample per branch");
  sample.validate();
  std::optional<BranchPlan> plan;
  std::vector<AveragedJudgment> averaged;

  auto branch = [&](const EvalSample& s, ModuleContext& ctx) {
    plan = branch_criteria(s, ctx, config.max_k, config);
    return plan->criteria;
  };
  auto solve = [&](const Criterion& c, std::size_t, ModuleContext& ctx) {
    std::vector<std::optional<CriterionJudgment>> draws(n);
    std::vector<std::exception_ptr> parse_errors(n);
    auto errors = parallel_for(n, config.parallelism, [&](std::size_t j) {
      Sample decoding{temperature, seed + static_cast<std::int64_t>(j)};
      try {
        draws[j] = solve_criterion(sample, order, c, config.scale, ctx, config, decoding);
      } catch (const Error& e) {
        if (!is_parse_error(e)) throw;
        parse_errors[j] = std::current_exception();
      }
    });
    rethrow_first(errors);

    AveragedJudgment avg;
    avg.criterion = c;
    double first = 0.0;
    double second = 0.0;
    for (auto& d : draws) {
      if (!d) {
        ++avg.failed_samples;
        continue;
      }
      first += d->score_first;
      second += d->score_second;
      avg.samples.push_back(std::move(*d));
    }
    if (avg.samples.empty()) rethrow_first(parse_errors);
    avg.mean_first = first / static_cast<double>(avg.samples.size());
    avg.mean_second = second / static_cast<double>(avg.samples.size());
    return avg;
  };
  auto merge = [&](std::vector<AveragedJudgment> js, ModuleContext&) {
    std::vector<std::pair<double, double>> means;
    for (const auto& j : js) means.emplace_back(j.mean_first, j.mean_second);
    averaged = std::move(js);
    return merge_sum(means);
  };

  auto run = run_program(sample, backend, branch, solve, merge, ProgramOptions{config.parallelism, config.max_k});
  RunOutcome out;
  out.order = order;
  out.verdict = run.output;
  out.plan = std::move(plan);
  out.averaged = std::move(averaged);
  out.trace = std::move(run.trace);
  return out;
}

PairJudgment judge_with(const EvalSample& sample, const JudgeConfig& config, const BaselineConfig& method,
                        Backend& backend) {
  if (method.method == JudgeMethod::Bsm) return judge_pair(sample, config, backend);

  auto one_run = [&](EncodingOrder order) -> RunOutcome {
    switch (method.method) {
      case JudgeMethod::ZeroshotRelative: return zeroshot_relative(sample, order, backend, config);
      case JudgeMethod::ZeroshotAbsolute: return zeroshot_absolute(sample, order, backend, config);
      case JudgeMethod::PlanAndSolve: return plan_and_solve(sample, order, backend, config);
      case JudgeMethod::SelfConsistency:
        return self_consistency(sample, order, backend, config, method.n_samples, method.temperature, method.seed);
      case JudgeMethod::BsmSc:
        return run_bsm_sc(sample, order, backend, config, method.n_samples, method.temperature, method.seed);
      case JudgeMethod::Bsm: break;
    }
    throw ConfigError("unreachable judge method");
  };

  std::optional<RunOutcome> runs[2];
  auto errors = parallel_for(2, config.parallelism, [&](std::size_t i) {
    runs[i] = one_run(i == 0 ? EncodingOrder::AB : EncodingOrder::BA);
  });
  rethrow_first(errors);
  PairJudgment out;
  out.run1 = std::move(*runs[0]);
  out.run2 = std::move(*runs[1]);
  out.verdict = combine_runs(out.run1.verdict.verdict, out.run2.verdict.verdict);
  return out;
}

PairJudgment bsm_sc(const EvalSample& sample, Backend& backend, std::size_t n, double temperature,
                    const JudgeConfig& config, std::int64_t seed) {
  return judge_with(sample, config, {JudgeMethod::BsmSc, n, temperature, seed}, backend);
}

}  // namespace bsm
