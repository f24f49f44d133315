#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bsm/judge.hpp"

namespace bsm {

struct HumanJudgment {
  std::string question_id;
  int turn = 1;
  std::string model_a;
  std::string model_b;
  Verdict vote = Verdict::Tie;
  std::string annotator_id;

  /// Id of the EvalSample this vote is about (same format as EvalSample::id).
  std::string sample_id() const;
};

/// Final verdict per sample id.
using Predictions = std::map<std::string, Verdict>;

/// Absolute preference of the in-order and the swapped run, per sample id.
using RunPreferences = std::map<std::string, std::pair<Verdict, Verdict>>;

/// Whitespace-token lengths of the judged responses (A, B), per sample id.
using ResponseLengths = std::map<std::string, std::pair<std::size_t, std::size_t>>;

enum class AgreementMode { PerVote, Majority };

struct AgreementResult {
  double value = 0.0;
  std::size_t agreeing = 0;
  std::size_t denominator = 0;
  /// Votes whose sample has no prediction.
  std::size_t votes_without_prediction = 0;
  /// Majority mode only: samples dropped because their vote counts tie.
  std::size_t tied_samples = 0;
};

/// Exact-match agreement over {A, B, Tie}. Throws EmptyDenominator.
AgreementResult agreement(const Predictions& predictions, const std::vector<HumanJudgment>& humans,
                          AgreementMode mode);

/// Percentage of samples whose two runs prefer different responses, with
/// Tie as its own class. Throws EmptyDenominator.
double position_bias(const RunPreferences& runs);

struct LengthBiasResult {
  /// Evaluator picked the longer response (ties not counted).
  double percent = 0.0;
  /// Evaluator did not pick the shorter response (ties counted).
  double percent_with_ties = 0.0;
  std::size_t chose_longer = 0;
  std::size_t chose_tie = 0;
  std::size_t denominator = 0;
};

/// Over human votes that chose the strictly shorter response, how often the
/// evaluator chose the longer one. Throws EmptyDenominator.
LengthBiasResult length_bias(const Predictions& predictions, const std::vector<HumanJudgment>& humans,
                             const ResponseLengths& lengths);

struct SelfEnhancementResult {
  std::vector<std::string> sample_ids;
  AgreementResult agreement;
};

/// Per-vote agreement restricted to samples where one of the compared models
/// is the judge itself. Throws EmptySubset.
SelfEnhancementResult self_enhancement_subset(const std::vector<EvalSample>& samples,
                                              const Predictions& predictions,
                                              const std::vector<HumanJudgment>& humans,
                                              const std::string& judge_model_id);

std::size_t whitespace_tokens(std::string_view text);

/// Judged-turn response lengths for every sample.
ResponseLengths response_lengths(const std::vector<EvalSample>& samples);

struct SliceMetrics {
  std::optional<double> agreement;
  std::optional<double> agreement_majority;
  std::optional<double> position_bias;
  std::optional<double> length_bias;
  std::optional<double> length_bias_with_ties;
  std::size_t samples = 0;
  std::size_t votes = 0;
  std::size_t matched_votes = 0;
  std::size_t unmatched_votes = 0;

  bool operator==(const SliceMetrics&) const = default;
};

struct SelfEnhancementBlock {
  std::string judge_model;
  std::size_t subset_size = 0;
  std::optional<double> agreement;
  bool operator==(const SelfEnhancementBlock&) const = default;
};

struct MetricsReport {
  SliceMetrics overall;
  SliceMetrics turn1;
  SliceMetrics turn2;
  std::optional<SelfEnhancementBlock> self_enhancement;

  bool operator==(const MetricsReport&) const = default;
};

/// All judging metrics over the three slices. Slices without data carry
/// empty values instead of raising.
MetricsReport compute_metrics(const std::vector<EvalSample>& samples, const Predictions& predictions,
                              const RunPreferences& runs, const std::vector<HumanJudgment>& humans,
                              const std::optional<std::string>& judge_model_id = std::nullopt);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const nlohmann::json& j);

}  // namespace bsm
