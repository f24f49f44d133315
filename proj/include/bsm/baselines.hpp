#pragma once

#include <string>

#include "bsm/judge.hpp"

namespace bsm {

enum class JudgeMethod { Bsm, ZeroshotRelative, ZeroshotAbsolute, PlanAndSolve, SelfConsistency, BsmSc };

std::string to_string(JudgeMethod m);
JudgeMethod judge_method_from_string(std::string_view s);

struct BaselineConfig {
  JudgeMethod method = JudgeMethod::Bsm;
  /// Self-consistency votes per order, or samples per branch for bsm_sc.
  std::size_t n_samples = 5;
  double temperature = 0.7;
  /// Sample j of a run is drawn with seed `seed + j`.
  std::int64_t seed = 0;
};

// Single-order judges. Each returns the RunOutcome of one encoding order.

RunOutcome zeroshot_relative(const EvalSample& sample, EncodingOrder order, Backend& backend,
                             const JudgeConfig& config, const Decoding& decoding = Greedy{});

RunOutcome zeroshot_absolute(const EvalSample& sample, EncodingOrder order, Backend& backend,
                             const JudgeConfig& config);

/// Plan and per-criterion scores in one completion; the verdict comes from
/// its concluding "Total A / Total B" line.
RunOutcome plan_and_solve(const EvalSample& sample, EncodingOrder order, Backend& backend, const JudgeConfig& config);

/// Majority vote over `n` sampled relative judgments. Unparseable samples
/// are dropped; a tie between the top classes yields Tie.
RunOutcome self_consistency(const EvalSample& sample, EncodingOrder order, Backend& backend,
                            const JudgeConfig& config, std::size_t n, double temperature, std::int64_t seed);

/// Majority class of the parsed votes; Tie when the top count is shared.
/// Throws VerdictParseFailure when no vote parsed.
Position majority_vote(std::span<const std::optional<Position>> votes);

/// BSM with each criterion solved `n` times by sampling; branch scores are
/// the means of the parsed samples.
RunOutcome run_bsm_sc(const EvalSample& sample, EncodingOrder order, Backend& backend, const JudgeConfig& config,
                      std::size_t n, double temperature, std::int64_t seed);

/// Any judging method under the swap protocol.
PairJudgment judge_with(const EvalSample& sample, const JudgeConfig& config, const BaselineConfig& method,
                        Backend& backend);

/// Convenience wrapper: bsm_sc under the swap protocol.
PairJudgment bsm_sc(const EvalSample& sample, Backend& backend, std::size_t n, double temperature,
                    const JudgeConfig& config, std::int64_t seed = 0);

}  // namespace bsm
