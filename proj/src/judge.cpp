#include "bsm/judge.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <numeric>
#include <regex>
#include <sstream>

#include "bsm/errors.hpp"

namespace bsm {

namespace {

std::string_view trim_view(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& digits) {
  return digits.size() > 9 ? std::numeric_limits<int>::max() : std::stoi(digits);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string EvalSample::id() const {
  return question_id + ":" + model_a + ":" + model_b + ":t" + std::to_string(turn);
}

void EvalSample::validate() const {
  if (turn != 1 && turn != 2) throw SchemaError("sample " + id() + ": turn must be 1 or 2");
  if (turn == 2 && (!q2 || !r2_a || !r2_b)) {
    throw SchemaError("sample " + id() + ": turn-2 sample needs q2 and both second responses");
  }
  if (model_a == model_b) throw SchemaError("sample " + id() + ": model_a equals model_b");
}

EvalSample EvalSample::relabeled() const {
  EvalSample s = *this;
  std::swap(s.r1_a, s.r1_b);
  std::swap(s.r2_a, s.r2_b);
  std::swap(s.model_a, s.model_b);
  return s;
}

std::string to_string(Position p) {
  switch (p) {
    case Position::First: return "first";
    case Position::Second: return "second";
    case Position::Tie: return "tie";
  }
  return "tie";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::A: return "A";
    case Verdict::B: return "B";
    case Verdict::Tie: return "tie";
  }
  return "tie";
}

std::string to_string(EncodingOrder o) { return o == EncodingOrder::AB ? "AB" : "BA"; }

Position position_from_string(std::string_view s) {
  if (s == "first") return Position::First;
  if (s == "second") return Position::Second;
  if (s == "tie") return Position::Tie;
  throw SchemaError("unknown positional verdict '" + std::string(s) + "'");
}

Verdict verdict_from_string(std::string_view s) {
  auto l = lower(s);
  if (l == "a" || l == "model_a") return Verdict::A;
  if (l == "b" || l == "model_b") return Verdict::B;
  if (l == "tie" || l == "c") return Verdict::Tie;
  throw SchemaError("unknown verdict '" + std::string(s) + "'");
}

Verdict absolute_preference(EncodingOrder order, Position verdict) {
  if (verdict == Position::Tie) return Verdict::Tie;
  bool first = verdict == Position::First;
  if (order == EncodingOrder::AB) return first ? Verdict::A : Verdict::B;
  return first ? Verdict::B : Verdict::A;
}

Verdict combine_runs(Position in_order, Position swapped) {
  if (in_order == Position::First && swapped == Position::Second) return Verdict::A;
  if (in_order == Position::Second && swapped == Position::First) return Verdict::B;
  return Verdict::Tie;
}

std::string count_word(std::size_t n) {
  static const char* words[] = {"zero", "one", "two", "three", "four", "five",
                                "six",  "seven", "eight", "nine", "ten"};
  return n <= 10 ? words[n] : std::to_string(n);
}

// ---------------------------------------------------------------------------
// parse_criteria
// ---------------------------------------------------------------------------

namespace {

struct ListItem {
  bool numbered = false;
  std::size_t indent = 0;
  std::string_view content;
};

// Recognizes "1. x", "1) x", "1: x", "(1) x", "- x", "* x", "+ x", "• x".
std::optional<ListItem> list_item(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  ListItem item;
  item.indent = i;
  auto rest = line.substr(i);
  std::size_t marker = 0;
  if (!rest.empty() && std::isdigit(static_cast<unsigned char>(rest[0]))) {
    while (marker < rest.size() && std::isdigit(static_cast<unsigned char>(rest[marker]))) ++marker;
    if (marker >= rest.size() || (rest[marker] != '.' && rest[marker] != ')' && rest[marker] != ':')) return std::nullopt;
    ++marker;
    item.numbered = true;
  } else if (rest.size() > 1 && rest[0] == '(' && std::isdigit(static_cast<unsigned char>(rest[1]))) {
    marker = 1;
    while (marker < rest.size() && std::isdigit(static_cast<unsigned char>(rest[marker]))) ++marker;
    if (marker >= rest.size() || rest[marker] != ')') return std::nullopt;
    ++marker;
    item.numbered = true;
  } else if (!rest.empty() && (rest[0] == '-' || rest[0] == '*' || rest[0] == '+')) {
    // "**Title**" is emphasis, not a bullet.
    if (rest.size() > 1 && rest[0] == '*' && rest[1] == '*') return std::nullopt;
    marker = 1;
  } else if (rest.rfind("\xE2\x80\xA2", 0) == 0) {
    marker = 3;
  } else {
    return std::nullopt;
  }
  if (marker >= rest.size() || (rest[marker] != ' ' && rest[marker] != '\t')) return std::nullopt;
  item.content = trim_view(rest.substr(marker));
  if (item.content.empty()) return std::nullopt;
  return item;
}

std::string strip_decoration(std::string_view s) {
  s = trim_view(s);
  auto is_deco = [](char c) { return c == '*' || c == '#' || c == '"' || c == '`' || c == '_'; };
  while (!s.empty() && is_deco(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_deco(s.back())) s.remove_suffix(1);
  return std::string(trim_view(s));
}

Criterion split_criterion(std::string_view content) {
  std::size_t cut = std::string_view::npos;
  std::size_t skip = 0;
  auto consider = [&](std::string_view sep) {
    auto p = content.find(sep);
    if (p != std::string_view::npos && p < cut) {
      cut = p;
      skip = sep.size();
    }
  };
  consider(":");
  consider(" - ");
  consider(" \xE2\x80\x93 ");  // en dash
  consider(" \xE2\x80\x94 ");  // em dash
  if (cut == std::string_view::npos) return {strip_decoration(content), ""};
  return {strip_decoration(content.substr(0, cut)), strip_decoration(content.substr(cut + skip))};
}

}  // namespace

std::vector<Criterion> parse_criteria(std::string_view text, std::size_t max_k) {
  std::vector<Criterion> out;
  std::optional<ListItem> first;
  bool have_open_item = false;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    auto item = list_item(line);
    // Nested bullets under a numbered item belong to that item.
    bool nested = item && first && have_open_item && item->numbered != first->numbered && item->indent > first->indent;
    if (item && !nested) {
      if (!first) first = item;
      auto c = split_criterion(item->content);
      if (c.title.empty()) {
        have_open_item = false;
        continue;
      }
      out.push_back(std::move(c));
      have_open_item = true;
      continue;
    }
    auto content = nested ? item->content : trim_view(line);
    bool indented = !line.empty() && (line[0] == ' ' || line[0] == '\t');
    if (content.empty()) continue;
    if (have_open_item && (indented || nested)) {
      auto& d = out.back().description;
      auto extra = strip_decoration(content);
      d = d.empty() ? extra : d + " " + extra;
    } else {
      have_open_item = false;
    }
  }
  if (out.empty()) throw ParseFailure("no numbered or bulleted criteria found");
  if (out.size() > max_k) out.resize(max_k);
  return out;
}

// ---------------------------------------------------------------------------
// parse_scores
// ---------------------------------------------------------------------------

namespace {

struct LabelPatterns {
  std::regex labelled;
  std::regex bare;

  explicit LabelPatterns(char label)
      : labelled("(?:[Aa]ssistant|ASSISTANT|[Rr]esponse|RESPONSE)\\s+" + std::string(1, label) +
                 "\\b[^0-9\\n]{0,60}?(\\d+)"),
        bare("(?:^|[^A-Za-z0-9_'])" + std::string(1, label) + "\\s*[:=]\\s*(\\d+)") {}
};

std::optional<std::pair<std::ptrdiff_t, int>> first_labelled(const std::string& text, char label) {
  static const LabelPatterns pattern_a('A');
  static const LabelPatterns pattern_b('B');
  const auto& p = label == 'A' ? pattern_a : pattern_b;
  std::optional<std::pair<std::ptrdiff_t, int>> best;
  for (const auto* re : {&p.labelled, &p.bare}) {
    std::smatch m;
    if (std::regex_search(text, m, *re)) {
      auto at = m.position(0);
      if (!best || at < best->first) best = {{at, to_int(m.str(1))}};
    }
  }
  return best;
}

void check_range(int first, int second, const Scale& scale, std::string_view text) {
  if (!scale.contains(first) || !scale.contains(second)) {
    throw ScoreOutOfRange("scores (" + std::to_string(first) + ", " + std::to_string(second) + ") outside scale " +
                          std::to_string(scale.lo) + "-" + std::to_string(scale.hi) + " in: " +
                          std::string(text.substr(0, 200)));
  }
}

}  // namespace

std::pair<int, int> parse_scores(std::string_view view, const Scale& scale) {
  const std::string text(view);

  // (1) labelled scores
  auto a = first_labelled(text, 'A');
  auto b = first_labelled(text, 'B');
  if (a && b) {
    check_range(a->second, b->second, scale, view);
    return {a->second, b->second};
  }

  // (2) fractions over the scale maximum
  static const std::regex fraction(R"((\d+)\s*(?:/|out of)\s*(\d+))");
  std::vector<int> numerators;
  std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> denominators;
  for (std::sregex_iterator it(text.begin(), text.end(), fraction), end; it != end; ++it) {
    const auto& m = *it;
    denominators.emplace_back(m.position(2), m.position(2) + m.length(2));
    if (to_int(m.str(2)) == scale.hi) numerators.push_back(to_int(m.str(1)));
  }
  if (numerators.size() >= 2) {
    check_range(numerators[0], numerators[1], scale, view);
    return {numerators[0], numerators[1]};
  }

  // (3) last two in-scale integers that are not denominators
  static const std::regex integer(R"(\b\d+\b)");
  std::vector<int> candidates;
  for (std::sregex_iterator it(text.begin(), text.end(), integer), end; it != end; ++it) {
    auto at = it->position(0);
    bool is_denominator = std::any_of(denominators.begin(), denominators.end(),
                                      [&](const auto& d) { return at >= d.first && at < d.second; });
    if (is_denominator || it->length(0) > 6) continue;
    int v = to_int(it->str(0));
    if (scale.contains(v)) candidates.push_back(v);
  }
  if (candidates.size() >= 2) return {candidates[candidates.size() - 2], candidates.back()};

  throw ScoreParseFailure("could not recover two scores from: " + std::string(view.substr(0, 200)));
}

// ---------------------------------------------------------------------------
// parse_verdict
// ---------------------------------------------------------------------------

namespace {

std::optional<Position> token_position(std::string_view token) {
  auto t = lower(token);
  if (t == "a") return Position::First;
  if (t == "b") return Position::Second;
  if (t == "c" || t == "tie") return Position::Tie;
  return std::nullopt;
}

std::optional<Position> last_capture(const std::string& text, const std::regex& re) {
  std::optional<Position> found;
  for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it) {
    if (auto p = token_position(it->str(1))) found = p;
  }
  return found;
}

}  // namespace

Position parse_verdict(std::string_view view) {
  const std::string text(view);

  static const std::regex bracketed(R"(\[\[\s*(A|B|C|[Tt]ie|TIE)\s*\]\])");
  if (auto p = last_capture(text, bracketed)) return *p;

  static const std::regex labelled(
      R"([Vv]erdict\s*(?:is\s*)?[:\-]?\s*\**\s*(?:(?:[Aa]ssistant|[Rr]esponse|[Ss]tory)\s+)?(A|B|[Tt]ie|TIE)\b)");
  if (auto p = last_capture(text, labelled)) return *p;

  {
    std::string bare(trim_view(view));
    auto is_noise = [](char c) { return c == '.' || c == '*' || c == '"' || c == '\'' || c == '[' || c == ']' || c == '!'; };
    bare.erase(std::remove_if(bare.begin(), bare.end(), is_noise), bare.end());
    auto l = lower(trim_view(bare));
    for (const char* prefix : {"assistant ", "response ", "story "}) {
      if (l.rfind(prefix, 0) == 0) l = l.substr(std::string_view(prefix).size());
    }
    if (auto p = token_position(l)) return *p;
  }

  static const std::regex better(
      R"(\b(?:[Aa]ssistant|[Rr]esponse|[Ss]tory)\s+(A|B)\s+(?:is|was)\s+(?:the\s+)?(?:better|preferred|superior|stronger))");
  std::optional<Position> claimed;
  bool conflicting = false;
  for (std::sregex_iterator it(text.begin(), text.end(), better), end; it != end; ++it) {
    auto p = token_position(it->str(1));
    if (claimed && p != claimed) conflicting = true;
    claimed = p;
  }
  if (claimed && !conflicting) return *claimed;

  static const std::regex tie(R"(\b[Tt]ie\b|\bTIE\b)");
  if (std::regex_search(text, tie)) return Position::Tie;

  throw VerdictParseFailure("no verdict token in: " + std::string(view.substr(0, 200)));
}

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

std::string render_conversation(const EvalSample& sample, EncodingOrder order, const TemplateSet& templates) {
  bool ab = order == EncodingOrder::AB;
  if (sample.turn == 1) {
    return templates.render("judge_conversation_turn1", {{"question", sample.q1},
                                                         {"answer_a", ab ? sample.r1_a : sample.r1_b},
                                                         {"answer_b", ab ? sample.r1_b : sample.r1_a}});
  }
  return templates.render("judge_conversation_turn2", {{"question_1", sample.q1},
                                                       {"question_2", *sample.q2},
                                                       {"answer_a_1", ab ? sample.r1_a : sample.r1_b},
                                                       {"answer_a_2", ab ? *sample.r2_a : *sample.r2_b},
                                                       {"answer_b_1", ab ? sample.r1_b : sample.r1_a},
                                                       {"answer_b_2", ab ? *sample.r2_b : *sample.r2_a}});
}

std::string render_reference_block(const EvalSample& sample, const TemplateSet& templates) {
  if (!sample.reference_answer) return {};
  return templates.render("judge_reference", {{"reference", *sample.reference_answer}});
}

std::string question_text(const EvalSample& sample) {
  if (sample.turn == 1) return sample.q1;
  return sample.q1 + "\n\nFollow-up question: " + *sample.q2;
}

// ---------------------------------------------------------------------------
// Modules
// ---------------------------------------------------------------------------

BranchPlan branch_criteria(const EvalSample& sample, Backend& backend, std::size_t max_k, const JudgeConfig& config) {
  if (max_k < 1) throw PreconditionViolation("max_k must be at least 1");
  sample.validate();
  const auto& templates = config.tmpl();
  std::string prompt =
      sample.turn == 1
          ? templates.render("judge_branch_turn1", {{"question", sample.q1}, {"max_k_words", count_word(max_k)}})
          : templates.render("judge_branch_turn2",
                             {{"question_1", sample.q1}, {"question_2", *sample.q2}, {"max_k_words", count_word(max_k)}});
  auto result = complete(backend, {prompt, Greedy{}, config.branch_max_tokens, config.model_id});
  BranchPlan plan;
  plan.raw_text = result.text;
  plan.criteria = parse_criteria(result.text, max_k);
  return plan;
}

CriterionJudgment solve_criterion(const EvalSample& sample, EncodingOrder order, const Criterion& criterion,
                                  const Scale& scale, Backend& backend, const JudgeConfig& config,
                                  const Decoding& decoding) {
  const auto& templates = config.tmpl();
  auto prompt = templates.render(sample.turn == 1 ? "judge_solve_turn1" : "judge_solve_turn2",
                                 {{"conversation", render_conversation(sample, order, templates)},
                                  {"reference_block", render_reference_block(sample, templates)},
                                  {"criterion_title", criterion.title},
                                  {"criterion_description", criterion.description},
                                  {"scale_lo", std::to_string(scale.lo)},
                                  {"scale_hi", std::to_string(scale.hi)}});
  auto result = complete(backend, {prompt, decoding, config.solve_max_tokens, config.model_id});
  auto [first, second] = parse_scores(result.text, scale);
  return {criterion, first, second, result.text, scale};
}

namespace {

RunVerdict compare_totals(double first, double second) {
  RunVerdict v;
  v.total_first = first;
  v.total_second = second;
  v.verdict = first > second ? Position::First : second > first ? Position::Second : Position::Tie;
  return v;
}

}  // namespace

RunVerdict merge_sum(std::span<const CriterionJudgment> judgments) {
  if (judgments.empty()) throw EmptyJudgments("sum-merge needs at least one judgment");
  const auto& scale = judgments.front().scale;
  long long first = 0;
  long long second = 0;
  for (const auto& j : judgments) {
    if (!(j.scale == scale)) throw PreconditionViolation("sum-merge over judgments with different scales");
    first += j.score_first;
    second += j.score_second;
  }
  return compare_totals(static_cast<double>(first), static_cast<double>(second));
}

RunVerdict merge_sum(std::span<const std::pair<double, double>> score_pairs) {
  if (score_pairs.empty()) throw EmptyJudgments("sum-merge needs at least one judgment");
  double first = 0.0;
  double second = 0.0;
  for (const auto& [f, s] : score_pairs) {
    first += f;
    second += s;
  }
  return compare_totals(first, second);
}

RunVerdict merge_neural(const EvalSample& sample, const BranchPlan& plan, std::span<const CriterionJudgment> judgments,
                        Backend& backend, const JudgeConfig& config) {
  (void)plan;
  if (judgments.empty()) throw EmptyJudgments("neural merge needs at least one judgment");
  std::ostringstream evals;
  for (std::size_t i = 0; i < judgments.size(); ++i) {
    const auto& j = judgments[i];
    evals << "Criterion " << (i + 1) << ": " << j.criterion.title;
    if (!j.criterion.description.empty()) evals << " - " << j.criterion.description;
    evals << "\nAssistant A score: " << j.score_first << "/" << j.scale.hi << "\nAssistant B score: " << j.score_second
          << "/" << j.scale.hi << "\nExplanation: " << trim_view(j.explanation) << "\n\n";
  }
  auto prompt = config.tmpl().render("judge_merge", {{"question", question_text(sample)}, {"evaluations", evals.str()}});
  auto result = complete(backend, {prompt, Greedy{}, config.merge_max_tokens, config.model_id});
  RunVerdict v;
  v.verdict = parse_verdict(result.text);
  return v;
}

// ---------------------------------------------------------------------------
// Controller
// ---------------------------------------------------------------------------

RunOutcome run_bsm(const EvalSample& sample, EncodingOrder order, Backend& backend, const JudgeConfig& config,
                   const BranchPlan* shared_plan) {
  sample.validate();
  std::optional<BranchPlan> plan;
  std::vector<CriterionJudgment> judgments;

  auto branch = [&](const EvalSample& s, ModuleContext& ctx) {
    plan = shared_plan ? *shared_plan : branch_criteria(s, ctx, config.max_k, config);
    return plan->criteria;
  };
  auto solve = [&](const Criterion& c, std::size_t, ModuleContext& ctx) {
    return solve_criterion(sample, order, c, config.scale, ctx, config);
  };
  auto merge = [&](std::vector<CriterionJudgment> js, ModuleContext& ctx) {
    judgments = js;
    return config.merge == MergeVariant::Sum ? merge_sum(js) : merge_neural(sample, *plan, js, ctx, config);
  };

  ProgramOptions options{config.parallelism, config.max_k};
  auto run = run_program(sample, backend, branch, solve, merge, options);

  RunOutcome out;
  out.order = order;
  out.verdict = run.output;
  out.plan = std::move(plan);
  out.judgments = std::move(judgments);
  out.trace = std::move(run.trace);
  return out;
}

PairJudgment judge_pair(const EvalSample& sample, const JudgeConfig& config, Backend& backend) {
  PairJudgment out;
  if (config.share_branch_plan) {
    out.run1 = run_bsm(sample, EncodingOrder::AB, backend, config);
    out.run2 = run_bsm(sample, EncodingOrder::BA, backend, config, &*out.run1.plan);
  } else {
    std::optional<RunOutcome> runs[2];
    auto errors = parallel_for(2, config.parallelism, [&](std::size_t i) {
      runs[i] = run_bsm(sample, i == 0 ? EncodingOrder::AB : EncodingOrder::BA, backend, config);
    });
    rethrow_first(errors);
    out.run1 = std::move(*runs[0]);
    out.run2 = std::move(*runs[1]);
  }
  out.verdict = combine_runs(out.run1.verdict.verdict, out.run2.verdict.verdict);
  return out;
}

}  // namespace bsm
