#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bsm/judge.hpp"
#include "bsm/metrics.hpp"
#include "bsm/story.hpp"

namespace bsm {

/// MT-Bench domain names, verbatim.
const std::vector<std::string>& benchmark_categories();

/// Categories judged with a reference answer attached.
bool uses_reference(std::string_view category);

struct EvalDataset {
  std::vector<EvalSample> samples;
  std::vector<HumanJudgment> humans;
  /// Models in order of first appearance in the responses file.
  std::vector<std::string> models;
  std::map<std::string, std::size_t> samples_per_category;
};

/// Joins question, response and (optional) human-vote record files into
/// pairwise samples: every model pair i < j, for each turn of each question.
///
/// questions: {"question_id", "category", "turns": [..], "reference": [..]?}
/// responses: {"question_id", "model"|"model_id", "turns"|"choices"[0].turns}
/// humans:    {"question_id", "model_a", "model_b", "winner", "turn", "judge"?}
///
/// Votes recorded against the reverse model order are flipped onto the
/// sample's order. Throws SchemaError (with line number), JoinError, IoError.
EvalDataset load_eval_dataset(const std::filesystem::path& questions, const std::filesystem::path& responses,
                              const std::optional<std::filesystem::path>& humans = std::nullopt);

/// Keeps only samples and votes of one category.
EvalDataset filter_category(const EvalDataset& data, const std::string& category);

struct ConceptSetFile {
  std::vector<ConceptSet> sets;
  /// Duplicate concepts dropped while loading.
  std::size_t duplicate_warnings = 0;
};

/// One record per line: {"id"?, "concepts": [..]} or a bare array. Concepts
/// are lowercased and deduplicated. Throws SchemaError, IoError.
ConceptSetFile load_concept_sets(const std::filesystem::path& path);

}  // namespace bsm
