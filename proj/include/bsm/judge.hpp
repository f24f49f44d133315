#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bsm/backend.hpp"
#include "bsm/program.hpp"
#include "bsm/templates.hpp"

namespace bsm {

/// One pairwise-judging instance: a question (two-turn capable), two model
/// responses and the turn being judged.
struct EvalSample {
  std::string question_id;
  std::string category;
  int turn = 1;
  std::string q1;
  std::optional<std::string> q2;
  std::string r1_a;
  std::optional<std::string> r2_a;
  std::string r1_b;
  std::optional<std::string> r2_b;
  std::string model_a;
  std::string model_b;
  std::optional<std::string> reference_answer;

  /// "<question_id>:<model_a>:<model_b>:t<turn>"
  std::string id() const;

  /// Throws SchemaError when the turn structure or model pair is invalid.
  void validate() const;

  /// The response text under judgment for each side.
  const std::string& judged_response_a() const { return turn == 2 ? *r2_a : r1_a; }
  const std::string& judged_response_b() const { return turn == 2 ? *r2_b : r1_b; }

  /// Same question with the A and B sides exchanged.
  EvalSample relabeled() const;
};

struct Criterion {
  std::string title;
  std::string description;
  bool operator==(const Criterion&) const = default;
};

struct BranchPlan {
  std::vector<Criterion> criteria;
  std::string raw_text;
};

struct Scale {
  int lo = 1;
  int hi = 5;
  bool operator==(const Scale&) const = default;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct CriterionJudgment {
  Criterion criterion;
  int score_first = 0;
  int score_second = 0;
  std::string explanation;
  Scale scale;
};

/// Verdict relative to the encoding order of one run.
enum class Position { First, Second, Tie };

/// Verdict naming the response itself.
enum class Verdict { A, B, Tie };

/// Which response is encoded first in a run.
enum class EncodingOrder { AB, BA };

std::string to_string(Position p);
std::string to_string(Verdict v);
std::string to_string(EncodingOrder o);
Position position_from_string(std::string_view s);
Verdict verdict_from_string(std::string_view s);

struct RunVerdict {
  Position verdict = Position::Tie;
  std::optional<double> total_first;
  std::optional<double> total_second;
};

enum class MergeVariant { Sum, Neural };

struct JudgeConfig {
  MergeVariant merge = MergeVariant::Sum;
  Scale scale;
  std::size_t max_k = 5;
  /// Reuse the first run's plan in the swapped run instead of re-branching.
  bool share_branch_plan = false;
  std::size_t parallelism = 1;
  std::string model_id;
  int branch_max_tokens = 512;
  int solve_max_tokens = 1024;
  int merge_max_tokens = 1024;
  const TemplateSet* templates = nullptr;

  const TemplateSet& tmpl() const { return templates ? *templates : TemplateSet::builtin(); }
};

/// Converts a run's positional verdict into the response it prefers.
Verdict absolute_preference(EncodingOrder order, Position verdict);

/// Swap-consistency rule: a response is chosen only when the in-order run
/// prefers it first-encoded and the swapped run prefers it second-encoded.
Verdict combine_runs(Position in_order, Position swapped);

/// "one", "two", ... "ten"; digits beyond.
std::string count_word(std::size_t n);

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Extracts numbered or bulleted criteria, keeping at most `max_k`.
/// Throws ParseFailure when no item is found.
std::vector<Criterion> parse_criteria(std::string_view text, std::size_t max_k);

/// Recovers (first, second) scores. Precedence: labelled `A: n` /
/// `Assistant A ... n` patterns; then `n/hi` (or `n out of hi`) fractions in
/// order of appearance; then the last two standalone integers inside the
/// scale that are not fraction denominators. Throws ScoreParseFailure or
/// ScoreOutOfRange.
std::pair<int, int> parse_scores(std::string_view text, const Scale& scale);

/// Maps a verdict completion to First (A), Second (B) or Tie. Throws
/// VerdictParseFailure.
Position parse_verdict(std::string_view text);

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

/// Both responses (or both conversations for turn 2) rendered in the given
/// encoding order.
std::string render_conversation(const EvalSample& sample, EncodingOrder order, const TemplateSet& templates);
std::string render_reference_block(const EvalSample& sample, const TemplateSet& templates);
/// Question text for turn-agnostic prompts: q1, or q1 and q2 for turn 2.
std::string question_text(const EvalSample& sample);

// ---------------------------------------------------------------------------
// Modules
// ---------------------------------------------------------------------------

/// Plans the evaluation criteria. Conditions on the question(s) only.
BranchPlan branch_criteria(const EvalSample& sample, Backend& backend, std::size_t max_k, const JudgeConfig& config);

/// Scores both responses on one criterion in the given encoding order.
CriterionJudgment solve_criterion(const EvalSample& sample, EncodingOrder order, const Criterion& criterion,
                                  const Scale& scale, Backend& backend, const JudgeConfig& config,
                                  const Decoding& decoding = Greedy{});

RunVerdict merge_sum(std::span<const CriterionJudgment> judgments);

/// Sum-merge over real-valued score pairs.
RunVerdict merge_sum(std::span<const std::pair<double, double>> score_pairs);

RunVerdict merge_neural(const EvalSample& sample, const BranchPlan& plan, std::span<const CriterionJudgment> judgments,
                        Backend& backend, const JudgeConfig& config);

// ---------------------------------------------------------------------------
// Swap-protocol controller
// ---------------------------------------------------------------------------

/// bsm_sc: per-criterion mean over several sampled solves.
struct AveragedJudgment {
  Criterion criterion;
  double mean_first = 0.0;
  double mean_second = 0.0;
  std::vector<CriterionJudgment> samples;
  std::size_t failed_samples = 0;
};

/// Record of one encoding-order run, common to every judging method.
struct RunOutcome {
  EncodingOrder order = EncodingOrder::AB;
  RunVerdict verdict;
  std::optional<BranchPlan> plan;
  std::vector<CriterionJudgment> judgments;
  std::vector<AveragedJudgment> averaged;
  /// Self-consistency votes; nullopt marks an unparseable sample.
  std::vector<std::optional<Position>> votes;
  ProgramTrace trace;

  Verdict preference() const { return absolute_preference(order, verdict.verdict); }
};

struct PairJudgment {
  Verdict verdict = Verdict::Tie;
  RunOutcome run1;  // A first
  RunOutcome run2;  // B first
};

/// One branch-solve-merge run in a fixed encoding order. When `plan` is
/// given the branch module is skipped and the plan reused.
RunOutcome run_bsm(const EvalSample& sample, EncodingOrder order, Backend& backend, const JudgeConfig& config,
                   const BranchPlan* plan = nullptr);

/// Two BSM runs with swapped encoding order, combined by combine_runs.
PairJudgment judge_pair(const EvalSample& sample, const JudgeConfig& config, Backend& backend);

}  // namespace bsm
