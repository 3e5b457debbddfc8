#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "icl/analysis.hpp"
#include "icl/augmentation.hpp"
#include "icl/corpus.hpp"
#include "icl/gateway.hpp"
#include "icl/selection.hpp"

namespace icl {

struct BackendSpec {
  std::string kind = "echo";  // echo | scripted | copycat | http
  std::map<std::string, std::string> exact;
  std::vector<std::pair<std::string, std::string>> contains;
  std::vector<std::string> sequence;
  HttpBackendConfig http;
  std::uint64_t embedding_seed = 0;
  std::size_t embedding_dim = 64;
};

struct GatewaySettings {
  int parallelism = 4;
  int max_attempts = 3;
  int backoff_base_ms = 1000;
};

struct AugmentationConfig {
  std::size_t m = 3000;
  std::size_t ctx = 32;
  int trials = 30;
  std::size_t rating_ctx = 30;
  FilterPolicy policy;
};

struct ExperimentConfig {
  TaskSpec task;
  std::string dataset_path;
  std::string query_path;
  BackendSpec backend;
  GatewaySettings gateway;
  SelectionPlan plan;
  std::vector<std::size_t> shots;  // empty means the doubling schedule
  bool doubling_shots = false;
  int runs = 1;
  std::optional<NoisePlan> noise;
  std::vector<double> noise_sweep;
  std::optional<AugmentationConfig> augmentation;
  std::string augmented_pool_path;
  std::string difficulty_scores_path;
  int difficulty_trials = 30;
  std::uint64_t seed = 0;
  std::uint64_t context_limit_tokens = 1048576;
  int max_output_tokens = 1024;
  std::string output_dir = "out";

  void validate() const;
};

ExperimentConfig load_config(const std::string& path);
/// Loads and applies an RFC 7386 merge patch before parsing.
ExperimentConfig load_config(const std::string& path,
                             const std::string& overrides_json);
ExperimentConfig parse_config_json(const std::string& json_text,
                                   const std::string& base_dir);

/// Stable hash of the canonicalized config; keys the results log.
std::string config_fingerprint(const ExperimentConfig& config);

std::shared_ptr<Backend> make_backend(const BackendSpec& spec,
                                      const ExamplePool* copycat_pool);
std::unique_ptr<Gateway> make_gateway(const ExperimentConfig& config,
                                      const ExamplePool* copycat_pool);

struct RunRecord {
  std::string fingerprint;
  int run_index = 0;
  std::size_t shot_count = 0;
  double noise_ratio = 0.0;
  std::string query_id;
  std::string prediction;
  bool failed = false;
  double score = 0.0;
  std::uint64_t prompt_tokens = 0;
  bool prompt_tokens_reported = false;
  std::uint64_t output_tokens = 0;
  double latency_ms = 0.0;
  std::string strategy;
  std::string dataset;
  std::string task_kind;
  std::string metric;
};

struct AggregateResult {
  std::string fingerprint;
  std::size_t shot_count = 0;
  double noise_ratio = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;
  int n_runs = 0;
  std::vector<double> per_run_means;
  std::size_t excluded = 0;
  double mean_prompt_tokens = 0.0;
  std::string strategy;
  std::string dataset;
  std::string task_kind;
  std::string metric;
};

struct ExperimentOutcome {
  std::string fingerprint;
  std::vector<RunRecord> records;       // full deterministic stream
  std::vector<RunRecord> new_records;   // subset not resumed from the log
  std::vector<AggregateResult> aggregates;
};

/// Executes the configured sweep (runs x shots x noise ratios). Previously
/// logged records for the same fingerprint are reused instead of re-queried.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

std::vector<AggregateResult> aggregate(const std::vector<RunRecord>& records);

void append_results_jsonl(const std::vector<RunRecord>& records,
                          const std::string& path);
std::vector<RunRecord> load_results_jsonl(const std::string& path);

/// report.md, aggregates.csv and the plot-ready curves/*.csv files.
void write_report(const std::vector<AggregateResult>& aggregates,
                  const std::optional<SignificanceMatrix>& significance,
                  const ExperimentConfig& config, const std::string& out_dir);

/// Convenience entry points behind the CLI subcommands.
ExperimentOutcome command_run(const ExperimentConfig& config);
void command_augment(const ExperimentConfig& config);
void command_score_difficulty(const ExperimentConfig& config,
                              const std::string& out_path);
void command_analyze(const ExperimentConfig& config, const std::string& kind,
                     const std::vector<std::string>& results_paths,
                     const std::string& baseline_method);
void command_report(const ExperimentConfig& config,
                    const std::vector<std::string>& results_paths);

/// Per-run means at the preferred observation point (largest shot count,
/// lowest noise ratio) for each (strategy, dataset); feeds the significance
/// matrix.
std::vector<MethodScores> method_scores_from_records(
    const std::vector<RunRecord>& records);

// Enum <-> name helpers shared by config parsing, the C API and the CLI.
Strategy parse_strategy(const std::string& name);
const char* strategy_name(Strategy strategy);
TaskKind parse_task_kind(const std::string& name);
const char* task_kind_name(TaskKind kind);
MetricId parse_metric(const std::string& name);
const char* metric_name(MetricId metric);
OrderPolicy parse_order_policy(const std::string& name);
const char* order_policy_name(OrderPolicy policy);
FilterMode parse_filter_mode(const std::string& name);
const char* filter_mode_name(FilterMode mode);

}  // namespace icl
