#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bsm/baselines.hpp"
#include "bsm/cache.hpp"
#include "bsm/metrics.hpp"
#include "bsm/story.hpp"

namespace bsm {

inline constexpr int kRecordSchemaVersion = 1;

enum class Task { Judge, Storygen };
std::string to_string(Task t);
Task task_from_string(std::string_view s);

struct BackendSpec {
  /// "mock" or "remote".
  std::string kind = "mock";
  std::string model_id = "mock-model";
  std::string endpoint_url;
  std::optional<std::string> mock_script;
  std::optional<std::string> cache_dir;
  /// Name of the environment variable holding the API key; the key itself is
  /// never stored.
  std::string api_key_env = "BSM_API_KEY";
};

struct RunConfig {
  Task task = Task::Judge;
  /// Judge: bsm, zeroshot_relative, zeroshot_absolute, plan_and_solve,
  /// self_consistency, bsm_sc. Storygen: bsm or zeroshot.
  std::string method = "bsm";
  BackendSpec backend;

  std::string questions_path;
  std::string responses_path;
  std::optional<std::string> humans_path;
  std::string concepts_path;

  std::optional<std::string> category;
  Scale scale;
  std::size_t max_k = 5;
  std::string merge = "sum";
  bool share_branch_plan = false;
  std::size_t n_samples = 5;
  double temperature = 0.7;
  std::int64_t seed = 0;
  std::size_t parallelism = 1;
  int branch_max_tokens = 512;
  int solve_max_tokens = 1024;
  int merge_max_tokens = 1024;
  std::optional<std::string> template_dir;
  /// Model whose own responses define the self-enhancement subset.
  std::optional<std::string> self_model;
  /// Storygen with method bsm: also write zero-shot stories and judge each
  /// pair.
  bool compare_baseline = true;
  std::string out_dir = "runs/out";
};

nlohmann::json to_json(const RunConfig& c);
/// Throws ConfigError on unknown values.
RunConfig run_config_from_json(const nlohmann::json& j);

struct SampleStatus {
  std::string id;
  bool ok = true;
  std::optional<std::string> error_kind;
  std::optional<std::string> error_message;
  bool operator==(const SampleStatus&) const = default;
};

struct StoryMethodMetrics {
  std::string method;
  std::size_t stories = 0;
  double all_present = 0.0;
  double missing_concepts = 0.0;
  /// Missing concepts lost at each stage (bsm only).
  std::size_t omitted_at_solve = 0;
  std::size_t omitted_at_merge = 0;
  bool operator==(const StoryMethodMetrics&) const = default;
};

/// Pairwise preference of the BSM story (X) over the baseline story (Y).
struct StoryPreferenceSummary {
  std::size_t pairs = 0;
  std::size_t bsm_wins = 0;
  std::size_t baseline_wins = 0;
  std::size_t ties = 0;
  std::size_t parse_failures = 0;
  double bsm_win_rate = 0.0;
  double baseline_win_rate = 0.0;
  double tie_rate = 0.0;
  bool operator==(const StoryPreferenceSummary&) const = default;
};

struct RunReport {
  int schema_version = kRecordSchemaVersion;
  Task task = Task::Judge;
  std::string method;
  std::size_t samples = 0;
  std::size_t ok = 0;
  std::size_t failed = 0;
  std::map<std::string, std::size_t> failures_by_kind;
  std::optional<MetricsReport> judge;
  std::vector<StoryMethodMetrics> story;
  std::optional<StoryPreferenceSummary> preference;
  bool operator==(const RunReport&) const = default;
};

nlohmann::json to_json(const RunReport& r);
/// Throws SchemaError on an unknown schema version or malformed report.
RunReport run_report_from_json(const nlohmann::json& j);

struct RunManifest {
  nlohmann::json config;
  std::vector<SampleStatus> samples;
  RunReport report;
  std::string report_file = "report.json";
  CallCounts calls;
  double wall_clock_ms = 0.0;
};

/// Deterministic part of the manifest: config, statuses, report reference
/// and total call count. Wall-clock and cache hits live in timing.json.
nlohmann::json to_json(const RunManifest& m);
nlohmann::json timing_json(const RunManifest& m);

/// Builds the configured backend, wrapped in the call cache and counter.
std::shared_ptr<CachedBackend> make_backend(const BackendSpec& spec);

/// Runs the configured task over the whole (filtered) input and writes into
/// out_dir: config.json, records.jsonl (one line per sample, input order,
/// written as soon as the prefix is complete), traces.jsonl, report.json,
/// report.txt, manifest.json and timing.json. Per-sample failures are
/// recorded, never thrown. Throws on unreadable inputs or unwritable outputs.
RunManifest run_suite(const RunConfig& config);

/// Same, with a caller-supplied backend (config.backend is only recorded).
RunManifest run_suite(const RunConfig& config, Backend& backend);

enum class ReportFormat { Table, Records };

std::string render_table(const RunReport& report);

/// Writes the report in the given format to `path`.
void emit_report(const RunManifest& manifest, ReportFormat format, const std::filesystem::path& path);

/// Reads back a records-format report.
RunReport load_report(const std::filesystem::path& path);

}  // namespace bsm
