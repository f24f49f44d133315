#include "bsm/harness.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>

#include <fmt/format.h>

#include "bsm/dataset.hpp"
#include "bsm/errors.hpp"
#include "bsm/mock_backend.hpp"
#include "bsm/parallel.hpp"
#include "bsm/remote_backend.hpp"

namespace bsm {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Task t) { return t == Task::Judge ? "judge" : "storygen"; }

Task task_from_string(std::string_view s) {
  if (s == "judge") return Task::Judge;
  if (s == "storygen") return Task::Storygen;
  throw ConfigError("unknown task '" + std::string(s) + "'");
}

namespace {

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> opt_get(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

json to_json(const RunConfig& c) {
  return {{"task", to_string(c.task)},
          {"method", c.method},
          {"backend",
           {{"kind", c.backend.kind},
            {"model_id", c.backend.model_id},
            {"endpoint_url", c.backend.endpoint_url},
            {"mock_script", opt(c.backend.mock_script)},
            {"cache_dir", opt(c.backend.cache_dir)},
            {"api_key_env", c.backend.api_key_env}}},
          {"questions_path", c.questions_path},
          {"responses_path", c.responses_path},
          {"humans_path", opt(c.humans_path)},
          {"concepts_path", c.concepts_path},
          {"category", opt(c.category)},
          {"scale", {c.scale.lo, c.scale.hi}},
          {"max_k", c.max_k},
          {"merge", c.merge},
          {"share_branch_plan", c.share_branch_plan},
          {"n_samples", c.n_samples},
          {"temperature", c.temperature},
          {"seed", c.seed},
          {"parallelism", c.parallelism},
          {"branch_max_tokens", c.branch_max_tokens},
          {"solve_max_tokens", c.solve_max_tokens},
          {"merge_max_tokens", c.merge_max_tokens},
          {"template_dir", opt(c.template_dir)},
          {"self_model", opt(c.self_model)},
          {"compare_baseline", c.compare_baseline},
          {"out_dir", c.out_dir}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    c.task = task_from_string(j.value("task", std::string("judge")));
    c.method = j.value("method", c.method);
    if (auto it = j.find("backend"); it != j.end()) {
      const auto& b = *it;
      c.backend.kind = b.value("kind", c.backend.kind);
      c.backend.model_id = b.value("model_id", c.backend.model_id);
      c.backend.endpoint_url = b.value("endpoint_url", c.backend.endpoint_url);
      c.backend.mock_script = opt_get<std::string>(b, "mock_script");
      c.backend.cache_dir = opt_get<std::string>(b, "cache_dir");
      c.backend.api_key_env = b.value("api_key_env", c.backend.api_key_env);
    }
    c.questions_path = j.value("questions_path", c.questions_path);
    c.responses_path = j.value("responses_path", c.responses_path);
    c.humans_path = opt_get<std::string>(j, "humans_path");
    c.concepts_path = j.value("concepts_path", c.concepts_path);
    c.category = opt_get<std::string>(j, "category");
    if (auto it = j.find("scale"); it != j.end()) c.scale = {it->at(0).get<int>(), it->at(1).get<int>()};
    c.max_k = j.value("max_k", c.max_k);
    c.merge = j.value("merge", c.merge);
    c.share_branch_plan = j.value("share_branch_plan", c.share_branch_plan);
    c.n_samples = j.value("n_samples", c.n_samples);
    c.temperature = j.value("temperature", c.temperature);
    c.seed = j.value("seed", c.seed);
    c.parallelism = j.value("parallelism", c.parallelism);
    c.branch_max_tokens = j.value("branch_max_tokens", c.branch_max_tokens);
    c.solve_max_tokens = j.value("solve_max_tokens", c.solve_max_tokens);
    c.merge_max_tokens = j.value("merge_max_tokens", c.merge_max_tokens);
    c.template_dir = opt_get<std::string>(j, "template_dir");
    c.self_model = opt_get<std::string>(j, "self_model");
    c.compare_baseline = j.value("compare_baseline", c.compare_baseline);
    c.out_dir = j.value("out_dir", c.out_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  }
  if (c.task == Task::Judge) {
    judge_method_from_string(c.method);
  } else if (c.method != "bsm" && c.method != "zeroshot") {
    throw ConfigError("storygen method must be bsm or zeroshot, got '" + c.method + "'");
  }
  if (c.merge != "sum" && c.merge != "neural") throw ConfigError("unknown merge variant '" + c.merge + "'");
  return c;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

json to_json(const RunReport& r) {
  json story = json::array();
  for (const auto& m : r.story) {
    story.push_back({{"method", m.method},
                     {"stories", m.stories},
                     {"ap", m.all_present},
                     {"mc", m.missing_concepts},
                     {"omitted_at_solve", m.omitted_at_solve},
                     {"omitted_at_merge", m.omitted_at_merge}});
  }
  json pref = nullptr;
  if (r.preference) {
    const auto& p = *r.preference;
    pref = {{"pairs", p.pairs},
            {"bsm_wins", p.bsm_wins},
            {"baseline_wins", p.baseline_wins},
            {"ties", p.ties},
            {"parse_failures", p.parse_failures},
            {"bsm_win_rate", p.bsm_win_rate},
            {"baseline_win_rate", p.baseline_win_rate},
            {"tie_rate", p.tie_rate}};
  }
  return {{"schema_version", r.schema_version},
          {"task", to_string(r.task)},
          {"method", r.method},
          {"samples", r.samples},
          {"ok", r.ok},
          {"failed", r.failed},
          {"failures_by_kind", r.failures_by_kind},
          {"judge", r.judge ? to_json(*r.judge) : json(nullptr)},
          {"story", std::move(story)},
          {"preference", std::move(pref)}};
}

RunReport run_report_from_json(const json& j) {
  RunReport r;
  try {
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kRecordSchemaVersion) {
      throw SchemaError("unsupported report schema version " + std::to_string(r.schema_version));
    }
    r.task = task_from_string(j.at("task").get<std::string>());
    r.method = j.at("method").get<std::string>();
    r.samples = j.at("samples").get<std::size_t>();
    r.ok = j.at("ok").get<std::size_t>();
    r.failed = j.at("failed").get<std::size_t>();
    r.failures_by_kind = j.at("failures_by_kind").get<std::map<std::string, std::size_t>>();
    if (!j.at("judge").is_null()) r.judge = metrics_report_from_json(j.at("judge"));
    for (const auto& m : j.at("story")) {
      r.story.push_back({m.at("method").get<std::string>(), m.at("stories").get<std::size_t>(),
                         m.at("ap").get<double>(), m.at("mc").get<double>(),
                         m.at("omitted_at_solve").get<std::size_t>(), m.at("omitted_at_merge").get<std::size_t>()});
    }
    if (const auto& p = j.at("preference"); !p.is_null()) {
      r.preference = StoryPreferenceSummary{p.at("pairs").get<std::size_t>(),
                                            p.at("bsm_wins").get<std::size_t>(),
                                            p.at("baseline_wins").get<std::size_t>(),
                                            p.at("ties").get<std::size_t>(),
                                            p.at("parse_failures").get<std::size_t>(),
                                            p.at("bsm_win_rate").get<double>(),
                                            p.at("baseline_win_rate").get<double>(),
                                            p.at("tie_rate").get<double>()};
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed report: ") + e.what());
  } catch (const ConfigError& e) {
    throw SchemaError(e.what());
  }
  return r;
}

json to_json(const RunManifest& m) {
  json samples = json::array();
  for (const auto& s : m.samples) {
    json e = {{"id", s.id}, {"status", s.ok ? "ok" : "failed"}};
    if (!s.ok) {
      e["error_kind"] = opt(s.error_kind);
      e["error_message"] = opt(s.error_message);
    }
    samples.push_back(std::move(e));
  }
  return {{"schema_version", kRecordSchemaVersion},
          {"config", m.config},
          {"samples", std::move(samples)},
          {"counts", {{"total", m.report.samples}, {"ok", m.report.ok}, {"failed", m.report.failed}}},
          {"report", m.report_file},
          {"backend_calls", m.calls.total}};
}

json timing_json(const RunManifest& m) {
  return {{"wall_clock_ms", m.wall_clock_ms},
          {"backend_calls", {{"total", m.calls.total}, {"cached", m.calls.cached}}}};
}

// ---------------------------------------------------------------------------
// Table rendering
// ---------------------------------------------------------------------------

namespace {

std::string cell(const std::optional<double>& v, int precision) {
  return v ? fmt::format("{:.{}f}", *v, precision) : std::string("-");
}

}  // namespace

std::string render_table(const RunReport& r) {
  std::string out = fmt::format("task: {}  method: {}  samples: {} (ok {}, failed {})\n", to_string(r.task), r.method,
                                r.samples, r.ok, r.failed);
  if (r.judge) {
    const auto& m = *r.judge;
    const SliceMetrics* slices[] = {&m.overall, &m.turn1, &m.turn2};
    out += fmt::format("\n{:<16}{:>10}{:>10}{:>10}\n", "", "Overall", "Turn-1", "Turn-2");
    auto row = [&](const char* name, std::optional<double> SliceMetrics::*field, int precision) {
      out += fmt::format("{:<16}", name);
      for (const auto* s : slices) out += fmt::format("{:>10}", cell(s->*field, precision));
      out += "\n";
    };
    row("Ag", &SliceMetrics::agreement, 4);
    row("Ag (majority)", &SliceMetrics::agreement_majority, 4);
    row("PB (%)", &SliceMetrics::position_bias, 2);
    row("LB (%)", &SliceMetrics::length_bias, 2);
    row("LB+ties (%)", &SliceMetrics::length_bias_with_ties, 2);
    out += fmt::format("{:<16}", "samples");
    for (const auto* s : slices) out += fmt::format("{:>10}", s->samples);
    out += fmt::format("\n{:<16}", "human votes");
    for (const auto* s : slices) out += fmt::format("{:>10}", s->votes);
    out += "\n";
    if (m.self_enhancement) {
      const auto& sb = *m.self_enhancement;
      out += fmt::format("\nSB ({}): Ag {} over {} samples\n", sb.judge_model, cell(sb.agreement, 4), sb.subset_size);
    }
  }
  if (!r.story.empty()) {
    out += fmt::format("\n{:<12}{:>10}{:>10}{:>10}\n", "method", "stories", "AP (%)", "MC (%)");
    for (const auto& s : r.story) {
      out += fmt::format("{:<12}{:>10}{:>10.2f}{:>10.2f}\n", s.method, s.stories, s.all_present, s.missing_concepts);
    }
    for (const auto& s : r.story) {
      if (s.method == "bsm") {
        out += fmt::format("omissions (bsm): solve {}, merge {}\n", s.omitted_at_solve, s.omitted_at_merge);
      }
    }
  }
  if (r.preference) {
    const auto& p = *r.preference;
    out += fmt::format("\npreference over {} pairs: bsm {:.2f}%  tie {:.2f}%  zeroshot {:.2f}%", p.pairs,
                       p.bsm_win_rate, p.tie_rate, p.baseline_win_rate);
    if (p.parse_failures) out += fmt::format("  ({} unparsed verdicts)", p.parse_failures);
    out += "\n";
  }
  if (!r.failures_by_kind.empty()) {
    out += "\nfailures:";
    for (const auto& [kind, n] : r.failures_by_kind) out += fmt::format(" {} {}", kind, n);
    out += "\n";
  }
  return out;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void emit_report(const RunManifest& manifest, ReportFormat format, const fs::path& path) {
  write_file(path, format == ReportFormat::Table ? render_table(manifest.report)
                                                 : to_json(manifest.report).dump(2) + "\n");
}

RunReport load_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return run_report_from_json(j);
}

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

std::shared_ptr<CachedBackend> make_backend(const BackendSpec& spec) {
  BackendPtr inner;
  if (spec.kind == "mock") {
    auto script = spec.mock_script ? MockScript::load(*spec.mock_script) : MockScript{};
    inner = std::make_shared<MockBackend>(std::move(script));
  } else if (spec.kind == "remote") {
    if (spec.endpoint_url.empty()) throw ConfigError("remote backend needs an endpoint URL");
    RemoteConfig rc;
    rc.endpoint_url = spec.endpoint_url;
    rc.model_id = spec.model_id;
    if (const char* key = std::getenv(spec.api_key_env.c_str())) rc.api_key = key;
    inner = std::make_shared<RemoteBackend>(std::move(rc));
  } else {
    throw ConfigError("unknown backend '" + spec.kind + "'");
  }
  std::shared_ptr<CallCache> cache;
  if (spec.cache_dir) cache = std::make_shared<CallCache>(*spec.cache_dir);
  return std::make_shared<CachedBackend>(std::move(inner), std::move(cache));
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

namespace {

// Single serialized sink: accepts records out of order, writes them in input
// order as soon as the prefix is complete.
class OrderedSink {
 public:
  OrderedSink(const fs::path& records, const fs::path& traces)
      : records_(records, std::ios::binary | std::ios::trunc), traces_(traces, std::ios::binary | std::ios::trunc) {
    if (!records_) throw IoError("cannot write " + records.string());
    if (!traces_) throw IoError("cannot write " + traces.string());
  }

  void submit(std::size_t index, std::string record, std::string trace) {
    std::lock_guard lock(mutex_);
    pending_.emplace(index, std::make_pair(std::move(record), std::move(trace)));
    for (auto it = pending_.find(next_); it != pending_.end(); it = pending_.find(next_)) {
      records_ << it->second.first << '\n';
      traces_ << it->second.second << '\n';
      pending_.erase(it);
      ++next_;
    }
    records_.flush();
    traces_.flush();
    if (!records_ || !traces_) throw IoError("failed to append run records");
  }

 private:
  std::mutex mutex_;
  std::ofstream records_;
  std::ofstream traces_;
  std::map<std::size_t, std::pair<std::string, std::string>> pending_;
  std::size_t next_ = 0;
};

void record_failure(json& rec, SampleStatus& status, const std::string& kind, const std::string& message) {
  status.ok = false;
  status.error_kind = kind;
  status.error_message = message;
  rec["status"] = "failed";
  rec["error_kind"] = kind;
  rec["error_message"] = message;
}

json criterion_json(const Criterion& c) { return {{"title", c.title}, {"description", c.description}}; }

json run_json(const RunOutcome& r) {
  json j = {{"order", to_string(r.order)},
            {"verdict", to_string(r.verdict.verdict)},
            {"preference", to_string(r.preference())},
            {"total_first", opt(r.verdict.total_first)},
            {"total_second", opt(r.verdict.total_second)}};
  if (r.plan) {
    json plan = json::array();
    for (const auto& c : r.plan->criteria) plan.push_back(criterion_json(c));
    j["plan"] = std::move(plan);
  }
  if (!r.judgments.empty()) {
    json js = json::array();
    for (const auto& c : r.judgments) {
      js.push_back({{"criterion", c.criterion.title},
                    {"score_first", c.score_first},
                    {"score_second", c.score_second},
                    {"explanation", c.explanation}});
    }
    j["judgments"] = std::move(js);
  }
  if (!r.averaged.empty()) {
    json js = json::array();
    for (const auto& a : r.averaged) {
      js.push_back({{"criterion", a.criterion.title},
                    {"mean_first", a.mean_first},
                    {"mean_second", a.mean_second},
                    {"samples", a.samples.size()},
                    {"failed_samples", a.failed_samples}});
    }
    j["averaged"] = std::move(js);
  }
  if (!r.votes.empty()) {
    json votes = json::array();
    for (const auto& v : r.votes) votes.push_back(v ? json(to_string(*v)) : json(nullptr));
    j["votes"] = std::move(votes);
  }
  return j;
}

struct JudgeOutcome {
  Verdict verdict;
  Verdict run1;
  Verdict run2;
};

struct StoryOutcome {
  std::optional<StoryResult> bsm;
  std::optional<StoryResult> zeroshot;
  std::optional<StoryPairVerdict> preference;
};

// Runs fn over n items on the pool; fn fills the status and returns the
// record and trace lines. Only sink failures escape.
template <class Fn>
std::vector<SampleStatus> run_pool(std::size_t n, std::size_t parallelism, OrderedSink& sink, Fn&& fn) {
  std::vector<SampleStatus> statuses(n);
  auto errors = parallel_for(n, parallelism, [&](std::size_t i) {
    auto [record, trace] = fn(i, statuses[i]);
    sink.submit(i, std::move(record), std::move(trace));
  });
  rethrow_first(errors);
  return statuses;
}

template <class Body>
void guarded(json& rec, json& trace, SampleStatus& status, Body&& body) {
  try {
    body();
    rec["status"] = "ok";
  } catch (const ProgramError& e) {
    record_failure(rec, status, e.kind(), e.what());
    trace["failed_program"] = e.trace().to_json();
  } catch (const Error& e) {
    record_failure(rec, status, e.kind(), e.what());
  } catch (const std::exception& e) {
    record_failure(rec, status, "InternalError", e.what());
  }
}

void finish_counts(RunReport& report, const std::vector<SampleStatus>& statuses) {
  report.samples = statuses.size();
  for (const auto& s : statuses) {
    if (s.ok) {
      ++report.ok;
    } else {
      ++report.failed;
      ++report.failures_by_kind[*s.error_kind];
    }
  }
}

void run_judge(const RunConfig& config, Backend& backend, const TemplateSet* templates, OrderedSink& sink,
               RunManifest& manifest) {
  auto data = load_eval_dataset(config.questions_path, config.responses_path,
                                config.humans_path ? std::optional<fs::path>(*config.humans_path) : std::nullopt);
  if (config.category) data = filter_category(data, *config.category);

  JudgeConfig jc;
  jc.merge = config.merge == "neural" ? MergeVariant::Neural : MergeVariant::Sum;
  jc.scale = config.scale;
  jc.max_k = config.max_k;
  jc.share_branch_plan = config.share_branch_plan;
  jc.parallelism = config.parallelism;
  jc.model_id = config.backend.model_id;
  jc.branch_max_tokens = config.branch_max_tokens;
  jc.solve_max_tokens = config.solve_max_tokens;
  jc.merge_max_tokens = config.merge_max_tokens;
  jc.templates = templates;
  BaselineConfig bc{judge_method_from_string(config.method), config.n_samples, config.temperature, config.seed};

  std::vector<std::optional<JudgeOutcome>> outcomes(data.samples.size());
  manifest.samples = run_pool(data.samples.size(), config.parallelism, sink, [&](std::size_t i, SampleStatus& st) {
    const auto& s = data.samples[i];
    st.id = s.id();
    json rec = {{"schema_version", kRecordSchemaVersion},
                {"id", s.id()},
                {"question_id", s.question_id},
                {"category", s.category},
                {"turn", s.turn},
                {"model_a", s.model_a},
                {"model_b", s.model_b}};
    json trace = {{"id", s.id()}};
    guarded(rec, trace, st, [&] {
      auto pj = judge_with(s, jc, bc, backend);
      rec["verdict"] = to_string(pj.verdict);
      rec["run1"] = run_json(pj.run1);
      rec["run2"] = run_json(pj.run2);
      trace["run1"] = pj.run1.trace.to_json();
      trace["run2"] = pj.run2.trace.to_json();
      outcomes[i] = JudgeOutcome{pj.verdict, pj.run1.preference(), pj.run2.preference()};
    });
    return std::make_pair(rec.dump(), trace.dump());
  });

  Predictions predictions;
  RunPreferences runs;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    if (!outcomes[i]) continue;
    auto id = data.samples[i].id();
    predictions[id] = outcomes[i]->verdict;
    runs[id] = {outcomes[i]->run1, outcomes[i]->run2};
  }
  manifest.report.judge = compute_metrics(data.samples, predictions, runs, data.humans, config.self_model);
}

void run_storygen(const RunConfig& config, Backend& backend, const TemplateSet* templates, OrderedSink& sink,
                  RunManifest& manifest) {
  if (config.method != "bsm" && config.method != "zeroshot") {
    throw ConfigError("storygen method must be bsm or zeroshot, got '" + config.method + "'");
  }
  auto file = load_concept_sets(config.concepts_path);
  StoryConfig sc;
  sc.model_id = config.backend.model_id;
  sc.branch_max_tokens = config.branch_max_tokens;
  sc.story_max_tokens = config.solve_max_tokens;
  sc.parallelism = config.parallelism;
  sc.templates = templates;
  const bool with_bsm = config.method == "bsm";
  const bool with_zeroshot = config.method == "zeroshot" || config.compare_baseline;

  std::vector<std::optional<StoryOutcome>> outcomes(file.sets.size());
  manifest.samples = run_pool(file.sets.size(), config.parallelism, sink, [&](std::size_t i, SampleStatus& st) {
    const auto& set = file.sets[i];
    st.id = set.id;
    json rec = {{"schema_version", kRecordSchemaVersion}, {"id", set.id}, {"concepts", set.concepts}};
    json trace = {{"id", set.id}};
    guarded(rec, trace, st, [&] {
      StoryOutcome out;
      if (with_bsm) {
        out.bsm = generate_story(set, backend, sc);
        rec["bsm"] = to_json(*out.bsm);
        trace["bsm"] = out.bsm->trace.to_json();
      }
      if (with_zeroshot) {
        out.zeroshot = generate_story_zeroshot(set, backend, sc);
        rec["zeroshot"] = to_json(*out.zeroshot);
        trace["zeroshot"] = out.zeroshot->trace.to_json();
      }
      if (out.bsm && out.zeroshot) {
        out.preference = judge_story_pair(set, out.bsm->final_story, out.zeroshot->final_story, backend, sc);
        const auto& p = *out.preference;
        rec["preference"] = {{"verdict", p.verdict == StoryPreference::X   ? "bsm"
                                         : p.verdict == StoryPreference::Y ? "zeroshot"
                                                                           : "tie"},
                             {"run1", p.run1 ? json(to_string(*p.run1)) : json(nullptr)},
                             {"run2", p.run2 ? json(to_string(*p.run2)) : json(nullptr)},
                             {"failures", p.failures}};
      }
      outcomes[i] = std::move(out);
    });
    return std::make_pair(rec.dump(), trace.dump());
  });

  std::vector<StoryResult> bsm_results, zeroshot_results;
  StoryPreferenceSummary pref;
  for (auto& o : outcomes) {
    if (!o) continue;
    if (o->bsm) bsm_results.push_back(std::move(*o->bsm));
    if (o->zeroshot) zeroshot_results.push_back(std::move(*o->zeroshot));
    if (o->preference) {
      ++pref.pairs;
      pref.parse_failures += o->preference->failures.size();
      switch (o->preference->verdict) {
        case StoryPreference::X: ++pref.bsm_wins; break;
        case StoryPreference::Y: ++pref.baseline_wins; break;
        case StoryPreference::Tie: ++pref.ties; break;
      }
    }
  }
  auto summarize = [&](const std::string& method, const std::vector<StoryResult>& results) {
    if (results.empty()) return;
    auto cm = constraint_metrics(results);
    StoryMethodMetrics m{method, results.size(), cm.all_present, cm.missing_concepts, 0, 0};
    for (const auto& r : results) {
      for (const auto& [_, stage] : r.stage_attribution) {
        ++(stage == OmissionStage::Solve ? m.omitted_at_solve : m.omitted_at_merge);
      }
    }
    manifest.report.story.push_back(m);
  };
  if (with_bsm) summarize("bsm", bsm_results);
  if (with_zeroshot) summarize("zeroshot", zeroshot_results);
  if (pref.pairs) {
    auto n = static_cast<double>(pref.pairs);
    pref.bsm_win_rate = 100.0 * static_cast<double>(pref.bsm_wins) / n;
    pref.baseline_win_rate = 100.0 * static_cast<double>(pref.baseline_wins) / n;
    pref.tie_rate = 100.0 * static_cast<double>(pref.ties) / n;
    manifest.report.preference = pref;
  }
}

}  // namespace

RunManifest run_suite(const RunConfig& config, Backend& backend) {
  auto started = std::chrono::steady_clock::now();
  if (config.task == Task::Judge) judge_method_from_string(config.method);

  std::optional<TemplateSet> overrides;
  if (config.template_dir) overrides = TemplateSet::with_overrides(*config.template_dir);
  const TemplateSet* templates = overrides ? &*overrides : nullptr;

  fs::path out(config.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

  RunManifest manifest;
  manifest.config = to_json(config);
  manifest.report.task = config.task;
  manifest.report.method = config.method;
  write_file(out / "config.json", manifest.config.dump(2) + "\n");

  {
    OrderedSink sink(out / "records.jsonl", out / "traces.jsonl");
    if (config.task == Task::Judge) {
      run_judge(config, backend, templates, sink, manifest);
    } else {
      run_storygen(config, backend, templates, sink, manifest);
    }
  }
  finish_counts(manifest.report, manifest.samples);

  if (auto* counted = dynamic_cast<CachedBackend*>(&backend)) manifest.calls = counted->counts();
  manifest.wall_clock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

  emit_report(manifest, ReportFormat::Records, out / manifest.report_file);
  emit_report(manifest, ReportFormat::Table, out / "report.txt");
  write_file(out / "manifest.json", to_json(manifest).dump(2) + "\n");
  write_file(out / "timing.json", timing_json(manifest).dump(2) + "\n");
  return manifest;
}

RunManifest run_suite(const RunConfig& config) {
  auto backend = make_backend(config.backend);
  return run_suite(config, *backend);
}

}  // namespace bsm
