#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bsm/dataset.hpp"
#include "bsm/errors.hpp"
#include "bsm/harness.hpp"

namespace {

bsm::Scale parse_scale(const std::string& text) {
  if (text == "5") return {1, 5};
  if (text == "10") return {1, 10};
  auto sep = text.find_first_of("-,:");
  if (sep == std::string::npos) throw bsm::ConfigError("scale must look like 1-5 or 1-10, got '" + text + "'");
  bsm::Scale s{std::stoi(text.substr(0, sep)), std::stoi(text.substr(sep + 1))};
  if (s.lo >= s.hi) throw bsm::ConfigError("scale bounds out of order: " + text);
  return s;
}

struct CommonFlags {
  std::string backend = "mock";
  std::string model_id = "mock-model";
  std::string endpoint_url;
  std::string api_key_env = "BSM_API_KEY";
  std::string cache_dir;
  std::string mock_script;
  std::string template_dir;
  std::string method = "bsm";
  std::size_t parallelism = 1;
  std::int64_t seed = 0;
  std::string out = "runs/out";
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--backend", f.backend, "mock or remote")->check(CLI::IsMember({"mock", "remote"}));
  cmd->add_option("--model-id", f.model_id, "Model identifier sent to the backend");
  cmd->add_option("--endpoint-url", f.endpoint_url, "Chat-completions URL for the remote backend");
  cmd->add_option("--api-key-env", f.api_key_env, "Environment variable holding the API key");
  cmd->add_option("--cache-dir", f.cache_dir, "Directory of the append-only call cache");
  cmd->add_option("--mock-script", f.mock_script, "JSON script for the mock backend")->check(CLI::ExistingFile);
  cmd->add_option("--template-dir", f.template_dir, "Directory of prompt template overrides")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--parallelism", f.parallelism, "Samples processed concurrently")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Base seed for sampled decoding");
  cmd->add_option("--out", f.out, "Output directory");
}

bsm::RunConfig base_config(const CommonFlags& f) {
  bsm::RunConfig c;
  c.method = f.method;
  c.backend.kind = f.backend;
  c.backend.model_id = f.model_id;
  c.backend.endpoint_url = f.endpoint_url;
  c.backend.api_key_env = f.api_key_env;
  if (!f.cache_dir.empty()) c.backend.cache_dir = f.cache_dir;
  if (!f.mock_script.empty()) c.backend.mock_script = f.mock_script;
  if (!f.template_dir.empty()) c.template_dir = f.template_dir;
  c.parallelism = f.parallelism;
  c.seed = f.seed;
  c.out_dir = f.out;
  return c;
}

void print_summary(const bsm::RunManifest& m, const std::string& out) {
  const auto& r = m.report;
  fmt::print("{} samples: {} ok, {} failed; {} backend calls ({} cached); outputs in {}\n", r.samples, r.ok, r.failed,
             m.calls.total, m.calls.cached, out);
  std::cout << bsm::render_table(r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branch-solve-merge judging and constrained story generation"};
  app.require_subcommand(1);

  CommonFlags judge_flags;
  std::string questions, responses, humans, category, scale = "1-5", merge = "sum", self_model;
  std::size_t max_k = 5, n_samples = 5;
  double temperature = 0.7;
  bool share_plan = false;
  auto* judge = app.add_subcommand("run-judge", "Pairwise judging over a question/response dataset");
  add_common(judge, judge_flags);
  judge->add_option("--questions", questions, "Question records (jsonl)")->required()->check(CLI::ExistingFile);
  judge->add_option("--responses", responses, "Model response records (jsonl)")->required()->check(CLI::ExistingFile);
  judge->add_option("--humans", humans, "Human vote records (jsonl)")->check(CLI::ExistingFile);
  judge->add_option("--method", judge_flags.method, "Judging method")
      ->check(CLI::IsMember({"bsm", "zeroshot_relative", "zeroshot_absolute", "plan_and_solve", "self_consistency",
                             "bsm_sc"}));
  judge->add_option("--category", category, "Keep one category only")
      ->check(CLI::IsMember(bsm::benchmark_categories()));
  judge->add_option("--scale", scale, "Score scale, 1-5 or 1-10");
  judge->add_option("--max-k", max_k, "Most criteria the branch module may propose")->check(CLI::PositiveNumber);
  judge->add_option("--merge", merge, "sum or neural")->check(CLI::IsMember({"sum", "neural"}));
  judge->add_flag("--share-branch-plan", share_plan, "Reuse the first run's plan in the swapped run");
  judge->add_option("--n-samples", n_samples, "Samples for self_consistency and bsm_sc")
      ->check(CLI::PositiveNumber);
  judge->add_option("--temperature", temperature, "Sampling temperature for self_consistency and bsm_sc");
  judge->add_option("--self-model", self_model, "Judge model id for the self-enhancement subset");

  CommonFlags story_flags;
  std::string concepts;
  bool no_compare = false;
  auto* story = app.add_subcommand("run-storygen", "Constrained story generation over concept sets");
  add_common(story, story_flags);
  story->add_option("--concepts", concepts, "Concept set records (jsonl)")->required()->check(CLI::ExistingFile);
  story->add_option("--method", story_flags.method, "bsm or zeroshot")->check(CLI::IsMember({"bsm", "zeroshot"}));
  story->add_flag("--no-compare", no_compare, "Skip zero-shot stories and pairwise preference");

  std::string run_dir, format = "table", report_out;
  auto* report = app.add_subcommand("report", "Render the report of a finished run");
  report->add_option("run_dir", run_dir, "Run output directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--format", format, "table or records")->check(CLI::IsMember({"table", "records"}));
  report->add_option("--out", report_out, "Write to a file instead of stdout");

  std::string v_questions, v_responses, v_humans, v_concepts;
  auto* validate = app.add_subcommand("validate-data", "Check dataset files and print counts");
  validate->add_option("--questions", v_questions)->check(CLI::ExistingFile);
  validate->add_option("--responses", v_responses)->check(CLI::ExistingFile);
  validate->add_option("--humans", v_humans)->check(CLI::ExistingFile);
  validate->add_option("--concepts", v_concepts)->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*judge) {
      auto c = base_config(judge_flags);
      c.task = bsm::Task::Judge;
      c.questions_path = questions;
      c.responses_path = responses;
      if (!humans.empty()) c.humans_path = humans;
      if (!category.empty()) c.category = category;
      if (!self_model.empty()) c.self_model = self_model;
      c.scale = parse_scale(scale);
      c.max_k = max_k;
      c.merge = merge;
      c.share_branch_plan = share_plan;
      c.n_samples = n_samples;
      c.temperature = temperature;
      print_summary(bsm::run_suite(c), c.out_dir);
    } else if (*story) {
      auto c = base_config(story_flags);
      c.task = bsm::Task::Storygen;
      c.concepts_path = concepts;
      c.compare_baseline = !no_compare;
      print_summary(bsm::run_suite(c), c.out_dir);
    } else if (*report) {
      bsm::RunManifest m;
      m.report = bsm::load_report(std::filesystem::path(run_dir) / "report.json");
      auto fmt_kind = format == "table" ? bsm::ReportFormat::Table : bsm::ReportFormat::Records;
      if (!report_out.empty()) {
        bsm::emit_report(m, fmt_kind, report_out);
      } else if (fmt_kind == bsm::ReportFormat::Table) {
        std::cout << bsm::render_table(m.report);
      } else {
        std::cout << bsm::to_json(m.report).dump(2) << "\n";
      }
    } else if (*validate) {
      if (v_questions.empty() != v_responses.empty()) {
        throw bsm::ConfigError("--questions and --responses go together");
      }
      if (v_questions.empty() && v_concepts.empty()) throw bsm::ConfigError("nothing to validate");
      if (!v_questions.empty()) {
        auto data = bsm::load_eval_dataset(v_questions, v_responses,
                                           v_humans.empty() ? std::nullopt
                                                            : std::optional<std::filesystem::path>(v_humans));
        fmt::print("{} models, {} samples, {} human votes\n", data.models.size(), data.samples.size(),
                   data.humans.size());
        for (const auto& [cat, n] : data.samples_per_category) fmt::print("  {:<12} {}\n", cat, n);
      }
      if (!v_concepts.empty()) {
        auto sets = bsm::load_concept_sets(v_concepts);
        fmt::print("{} concept sets, {} duplicate concepts dropped\n", sets.sets.size(), sets.duplicate_warnings);
      }
    }
  } catch (const bsm::Error& e) {
    fmt::print(stderr, "error [{}]: {}\n", e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
