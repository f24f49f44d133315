#include "bsm/story.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

#include "bsm/errors.hpp"
#include "bsm/porter_stemmer.hpp"

namespace bsm {

using json = nlohmann::json;

std::string to_string(OmissionStage s) { return s == OmissionStage::Solve ? "solve" : "merge"; }

std::string to_string(StoryPreference p) {
  switch (p) {
    case StoryPreference::X: return "X";
    case StoryPreference::Y: return "Y";
    case StoryPreference::Tie: return "tie";
  }
  return "tie";
}

namespace {

std::unordered_set<std::string> stem_set(std::string_view text) {
  std::unordered_set<std::string> out;
  for (const auto& t : word_tokens(text)) out.insert(porter_stem(t));
  return out;
}

bool present_in(std::string_view term, const std::unordered_set<std::string>& stems) {
  auto words = word_tokens(term);
  if (words.empty()) return false;
  return std::all_of(words.begin(), words.end(), [&](const auto& w) { return stems.count(porter_stem(w)) > 0; });
}

std::string join(const std::vector<std::string>& items, std::string_view sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string stem_key(std::string_view phrase) {
  std::string key;
  for (const auto& w : word_tokens(phrase)) {
    if (!key.empty()) key += ' ';
    key += porter_stem(w);
  }
  return key;
}

// "group 1", "set two", "concepts 2", ... -> 1 or 2.
std::optional<int> group_label(std::string_view head) {
  auto words = word_tokens(head);
  if (words.size() < 2) return std::nullopt;
  static const std::set<std::string> nouns = {"group", "set", "subset", "list", "concepts", "concept"};
  if (!nouns.count(words[words.size() - 2])) return std::nullopt;
  const auto& n = words.back();
  if (n == "1" || n == "one") return 1;
  if (n == "2" || n == "two") return 2;
  return std::nullopt;
}

std::vector<std::string> split_items(std::string_view content) {
  std::vector<std::string> out;
  std::string text(content);
  // " and " acts as a separator only between items.
  for (std::size_t p; (p = lower(text).find(" and ")) != std::string::npos;) text.replace(p, 5, ",");
  std::string current;
  auto flush = [&] {
    auto t = trim(current);
    while (!t.empty() && std::string_view(".*\"'[]()").find(t.front()) != std::string_view::npos) t.erase(0, 1);
    while (!t.empty() && std::string_view(".*\"'[]()").find(t.back()) != std::string_view::npos) t.pop_back();
    t = trim(t);
    if (!t.empty()) out.push_back(lower(t));
    current.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ';') {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return out;
}

}  // namespace

bool concept_present(std::string_view term, std::string_view story) {
  return present_in(term, stem_set(story));
}

std::vector<std::string> missing_concepts(const std::vector<std::string>& concepts, std::string_view story) {
  auto stems = stem_set(story);
  std::vector<std::string> out;
  for (const auto& c : concepts) {
    if (!present_in(c, stems)) out.push_back(c);
  }
  return out;
}

StoryPlan parse_story_plan(std::string_view text, const std::vector<std::string>& concepts) {
  if (concepts.size() < 2) throw PreconditionViolation("a story plan needs at least two concepts");

  std::map<std::string, std::string> by_exact;
  std::map<std::string, std::string> by_stem;
  for (const auto& c : concepts) {
    by_exact.emplace(lower(c), c);
    by_stem.emplace(stem_key(c), c);
  }
  auto resolve = [&](const std::string& item) -> std::optional<std::string> {
    if (auto it = by_exact.find(item); it != by_exact.end()) return it->second;
    if (auto it = by_stem.find(stem_key(item)); it != by_stem.end()) return it->second;
    return std::nullopt;
  };

  StoryPlan plan;
  plan.raw_text = std::string(text);
  std::vector<std::string> groups[2];
  bool saw_group = false;
  bool saw_topic = false;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    auto head = line.substr(0, colon);
    auto body = line.substr(colon + 1);
    auto head_words = word_tokens(head);
    if (!head_words.empty() && head_words.back() == "topic") {
      if (!saw_topic) {
        auto t = trim(body);
        while (!t.empty() && (t.front() == '*' || t.front() == '"')) t.erase(0, 1);
        while (!t.empty() && (t.back() == '*' || t.back() == '"')) t.pop_back();
        plan.topic = trim(t);
        saw_topic = !plan.topic.empty();
      }
      continue;
    }
    if (auto g = group_label(head)) {
      saw_group = true;
      for (const auto& item : split_items(body)) {
        if (auto c = resolve(item)) groups[*g - 1].push_back(*c);
      }
    }
  }
  if (!saw_group) throw PlanParseFailure("no concept groups in branch output");
  if (!saw_topic) throw PlanParseFailure("no topic line in branch output");
  if (groups[0].empty() && groups[1].empty()) throw PlanParseFailure("no known concept in either group");

  std::set<std::string> seen;
  for (auto* target : {&plan.subset_1, &plan.subset_2}) {
    const auto& source = target == &plan.subset_1 ? groups[0] : groups[1];
    for (const auto& c : source) {
      if (seen.insert(c).second) target->push_back(c);
    }
  }
  for (const auto& c : concepts) {
    if (seen.count(c)) continue;
    auto& smaller = plan.subset_2.size() < plan.subset_1.size() ? plan.subset_2 : plan.subset_1;
    smaller.push_back(c);
    seen.insert(c);
  }
  if (plan.subset_1.empty()) {
    plan.subset_1.push_back(plan.subset_2.back());
    plan.subset_2.pop_back();
  } else if (plan.subset_2.empty()) {
    plan.subset_2.push_back(plan.subset_1.back());
    plan.subset_1.pop_back();
  }
  return plan;
}

StoryPlan branch_concepts(const ConceptSet& set, Backend& backend, const StoryConfig& config) {
  auto prompt = config.tmpl().render("story_branch", {{"concepts", join(set.concepts)}});
  auto result = complete(backend, {prompt, Greedy{}, config.branch_max_tokens, config.model_id});
  return parse_story_plan(result.text, set.concepts);
}

std::string solve_substory(const std::vector<std::string>& subset, const std::string& topic, Backend& backend,
                           const StoryConfig& config) {
  if (subset.empty()) throw PreconditionViolation("solve_substory called with an empty concept subset");
  auto prompt = config.tmpl().render("story_solve", {{"concepts", join(subset)}, {"topic", topic}});
  return complete(backend, {prompt, Greedy{}, config.story_max_tokens, config.model_id}).text;
}

std::string merge_stories(const std::string& substory_1, const std::vector<std::string>& subset_1,
                          const std::string& substory_2, const std::vector<std::string>& subset_2, Backend& backend,
                          const StoryConfig& config) {
  auto prompt = config.tmpl().render("story_merge", {{"story_1", substory_1},
                                                     {"concepts_1", join(subset_1)},
                                                     {"story_2", substory_2},
                                                     {"concepts_2", join(subset_2)}});
  return complete(backend, {prompt, Greedy{}, config.story_max_tokens, config.model_id}).text;
}

std::map<std::string, OmissionStage> attribute_missing(const StoryResult& result) {
  std::map<std::string, OmissionStage> out;
  if (!result.plan) return out;
  auto final_stems = stem_set(result.final_story);
  auto stems_1 = stem_set(result.substory_1);
  auto stems_2 = stem_set(result.substory_2);
  std::set<std::string> in_first(result.plan->subset_1.begin(), result.plan->subset_1.end());
  for (const auto& c : result.concepts) {
    if (present_in(c, final_stems)) continue;
    const auto& own = in_first.count(c) ? stems_1 : stems_2;
    out[c] = present_in(c, own) ? OmissionStage::Merge : OmissionStage::Solve;
  }
  return out;
}

StoryResult generate_story(const ConceptSet& set, Backend& backend, const StoryConfig& config) {
  struct Branch {
    std::vector<std::string> subset;
    std::string topic;
  };
  StoryResult out;
  out.id = set.id;
  out.concepts = set.concepts;

  auto branch = [&](const ConceptSet& s, ModuleContext& ctx) {
    out.plan = branch_concepts(s, ctx, config);
    return std::vector<Branch>{{out.plan->subset_1, out.plan->topic}, {out.plan->subset_2, out.plan->topic}};
  };
  auto solve = [&](const Branch& b, std::size_t, ModuleContext& ctx) { return solve_substory(b.subset, b.topic, ctx, config); };
  auto merge = [&](std::vector<std::string> stories, ModuleContext& ctx) {
    out.substory_1 = stories[0];
    out.substory_2 = stories[1];
    return merge_stories(stories[0], out.plan->subset_1, stories[1], out.plan->subset_2, ctx, config);
  };

  auto run = run_program(set, backend, branch, solve, merge, ProgramOptions{config.parallelism, 2});
  out.final_story = std::move(run.output);
  out.trace = std::move(run.trace);
  out.missing = missing_concepts(out.concepts, out.final_story);
  out.stage_attribution = attribute_missing(out);
  return out;
}

StoryResult generate_story_zeroshot(const ConceptSet& set, Backend& backend, const StoryConfig& config) {
  StoryResult out;
  out.id = set.id;
  out.concepts = set.concepts;
  out.trace.started_ms = now_ms();
  out.trace.branch_count = 1;
  ModuleContext ctx(backend, out.trace.solve_calls[0], 0);
  auto prompt = config.tmpl().render("story_zeroshot", {{"concepts", join(set.concepts)}});
  out.final_story = complete(ctx, {prompt, Greedy{}, config.story_max_tokens, config.model_id}).text;
  out.trace.finished_ms = now_ms();
  out.trace.complete = true;
  out.missing = missing_concepts(out.concepts, out.final_story);
  return out;
}

ConstraintMetrics constraint_metrics(const std::vector<StoryResult>& results) {
  if (results.empty()) throw EmptyInput("constraint metrics over zero stories");
  std::size_t complete_count = 0;
  double missing_sum = 0.0;
  for (const auto& r : results) {
    if (r.concepts.empty()) throw PreconditionViolation("story result " + r.id + " has no concepts");
    if (r.missing.empty()) ++complete_count;
    missing_sum += 100.0 * static_cast<double>(r.missing.size()) / static_cast<double>(r.concepts.size());
  }
  auto n = static_cast<double>(results.size());
  return {100.0 * static_cast<double>(complete_count) / n, missing_sum / n};
}

StoryPairVerdict judge_story_pair(const ConceptSet& set, const std::string& story_x, const std::string& story_y,
                                  Backend& backend, const StoryConfig& config) {
  StoryPairVerdict out;
  auto ask = [&](const std::string& first, const std::string& second) -> std::optional<Position> {
    auto prompt =
        config.tmpl().render("story_judge", {{"concepts", join(set.concepts)}, {"story_a", first}, {"story_b", second}});
    auto result = complete(backend, {prompt, Greedy{}, config.story_max_tokens, config.model_id});
    try {
      return parse_verdict(result.text);
    } catch (const VerdictParseFailure& e) {
      out.failures.push_back(e.what());
      return std::nullopt;
    }
  };
  out.run1 = ask(story_x, story_y);
  out.run2 = ask(story_y, story_x);
  if (out.run1 && out.run2) {
    switch (combine_runs(*out.run1, *out.run2)) {
      case Verdict::A: out.verdict = StoryPreference::X; break;
      case Verdict::B: out.verdict = StoryPreference::Y; break;
      case Verdict::Tie: out.verdict = StoryPreference::Tie; break;
    }
  }
  return out;
}

json to_json(const StoryPlan& plan) {
  return {{"subset_1", plan.subset_1}, {"subset_2", plan.subset_2}, {"topic", plan.topic}, {"raw_text", plan.raw_text}};
}

json to_json(const StoryResult& r) {
  json attribution = json::object();
  for (const auto& [c, stage] : r.stage_attribution) attribution[c] = to_string(stage);
  return {{"id", r.id},
          {"concepts", r.concepts},
          {"plan", r.plan ? to_json(*r.plan) : json(nullptr)},
          {"substory_1", r.substory_1},
          {"substory_2", r.substory_2},
          {"final_story", r.final_story},
          {"missing", r.missing},
          {"attribution", std::move(attribution)}};
}

}  // namespace bsm
