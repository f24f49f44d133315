#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bsm/backend.hpp"
#include "bsm/judge.hpp"
#include "bsm/program.hpp"
#include "bsm/templates.hpp"

namespace bsm {

struct ConceptSet {
  std::string id;
  /// Lowercase, deduplicated, non-empty.
  std::vector<std::string> concepts;
};

/// Two disjoint, non-empty concept groups covering the set, plus a topic.
struct StoryPlan {
  std::vector<std::string> subset_1;
  std::vector<std::string> subset_2;
  std::string topic;
  std::string raw_text;
};

enum class OmissionStage { Solve, Merge };
std::string to_string(OmissionStage s);

struct StoryResult {
  std::string id;
  std::vector<std::string> concepts;
  /// Empty for single-pass baselines.
  std::optional<StoryPlan> plan;
  std::string substory_1;
  std::string substory_2;
  std::string final_story;
  std::vector<std::string> missing;
  std::map<std::string, OmissionStage> stage_attribution;
  ProgramTrace trace;
};

struct StoryConfig {
  std::string model_id;
  int branch_max_tokens = 512;
  int story_max_tokens = 1024;
  std::size_t parallelism = 1;
  const TemplateSet* templates = nullptr;

  const TemplateSet& tmpl() const { return templates ? *templates : TemplateSet::builtin(); }
};

/// True when every word of `term` shares a Porter stem with some token of
/// the story.
bool concept_present(std::string_view term, std::string_view story);

/// Concepts absent from the story, in input order.
std::vector<std::string> missing_concepts(const std::vector<std::string>& concepts, std::string_view story);

/// Parses "Group 1: ...", "Group 2: ...", "Topic: ..." lines and repairs the
/// partition: duplicates are removed from the second group, concepts absent
/// from both are appended to the smaller group, and an empty group receives
/// the last concept of the other. Throws PlanParseFailure.
StoryPlan parse_story_plan(std::string_view text, const std::vector<std::string>& concepts);

StoryPlan branch_concepts(const ConceptSet& set, Backend& backend, const StoryConfig& config);
std::string solve_substory(const std::vector<std::string>& subset, const std::string& topic, Backend& backend,
                           const StoryConfig& config);
std::string merge_stories(const std::string& substory_1, const std::vector<std::string>& subset_1,
                          const std::string& substory_2, const std::vector<std::string>& subset_2, Backend& backend,
                          const StoryConfig& config);

/// For each concept missing from the final story: Solve when its own
/// sub-story already lacks it, Merge otherwise.
std::map<std::string, OmissionStage> attribute_missing(const StoryResult& result);

/// Full branch -> two solves -> merge run, with omissions measured.
StoryResult generate_story(const ConceptSet& set, Backend& backend, const StoryConfig& config);

/// Single-prompt baseline story.
StoryResult generate_story_zeroshot(const ConceptSet& set, Backend& backend, const StoryConfig& config);

struct ConstraintMetrics {
  double all_present = 0.0;      // AP, percent
  double missing_concepts = 0.0; // MC, percent
};

/// Throws EmptyInput.
ConstraintMetrics constraint_metrics(const std::vector<StoryResult>& results);

enum class StoryPreference { X, Y, Tie };
std::string to_string(StoryPreference p);

struct StoryPairVerdict {
  StoryPreference verdict = StoryPreference::Tie;
  std::optional<Position> run1;  // X shown first
  std::optional<Position> run2;  // Y shown first
  std::vector<std::string> failures;
};

/// Pairwise quality judgment, run in both presentation orders; a story is
/// preferred only when both orders agree. Unparseable verdicts give Tie.
StoryPairVerdict judge_story_pair(const ConceptSet& set, const std::string& story_x, const std::string& story_y,
                                  Backend& backend, const StoryConfig& config);

nlohmann::json to_json(const StoryPlan& plan);
nlohmann::json to_json(const StoryResult& result);

}  // namespace bsm
