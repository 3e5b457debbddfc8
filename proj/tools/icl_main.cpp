// Command-line front end. All functionality lives behind the C API in
// libiclharness; this binary only parses arguments and forwards.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "iclharness.h"

namespace {

using nlohmann::json;

std::string absolute_path(const std::string& path) {
  return std::filesystem::absolute(path).string();
}

int finish(icl_status status) {
  if (status == ICL_OK) return 0;
  std::fprintf(stderr, "error (%d): %s\n", static_cast<int>(status), icl_last_error());
  return 1;
}

std::vector<const char*> to_cstrs(const std::vector<std::string>& strings) {
  std::vector<const char*> out;
  out.reserve(strings.size());
  for (const std::string& s : strings) out.push_back(s.c_str());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Many-shot in-context learning experiment harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string{icl_version()});

  std::string config_path;
  std::string output_dir;
  std::string output_path;
  std::vector<std::string> results_paths;

  // run
  auto* run = app.add_subcommand("run", "Run the configured experiment sweep");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", output_dir, "Output directory override");

  // augment
  auto* augment =
      app.add_subcommand("augment", "Generate, score and filter synthetic examples");
  std::string aug_pool, aug_policy, aug_task;
  long long aug_m = -1;
  double aug_tau = -1.0;
  augment->add_option("--config", config_path, "Experiment config (JSON)")->required();
  augment->add_option("--task", aug_task, "Template id override");
  augment->add_option("--pool", aug_pool, "Example pool override (JSONL)");
  augment->add_option("-m,--num-candidates", aug_m, "Number of candidates to generate");
  augment->add_option("--policy", aug_policy, "median-half or threshold");
  augment->add_option("--tau", aug_tau, "Quality threshold for the threshold policy");
  augment->add_option("--out", output_dir, "Output directory override");

  // score-difficulty
  auto* score = app.add_subcommand("score-difficulty",
                                   "Rate pool example difficulty through the backend");
  score->add_option("--config", config_path, "Experiment config (JSON)")->required();
  score->add_option("--out", output_path, "Difficulty scores output (JSONL)");

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "Hull / noise / utilization / significance analyses from logs");
  std::string analyze_kind, baseline = "Random";
  analyze->add_option("--config", config_path, "Experiment config (JSON)")->required();
  analyze->add_option("--kind", analyze_kind, "hull | noise | utilization | significance")
      ->required();
  analyze->add_option("--results", results_paths, "results.jsonl logs to analyze");
  analyze->add_option("--baseline", baseline, "Baseline method for significance");

  // report
  auto* report = app.add_subcommand("report", "Aggregate logs into report files");
  report->add_option("--config", config_path, "Experiment config (JSON)")->required();
  report->add_option("--results", results_paths, "results.jsonl logs to aggregate");

  // templates
  auto* templates = app.add_subcommand("templates", "Prompt template utilities");
  std::string template_dir;
  auto* templates_export =
      templates->add_subcommand("export", "Write built-in templates to a directory");
  templates_export->add_option("--dir", template_dir, "Target directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return finish(icl_cmd_run(config_path.c_str(), nullptr,
                              output_dir.empty() ? nullptr : output_dir.c_str()));
  }

  if (augment->parsed()) {
    json overrides = json::object();
    if (!aug_task.empty()) overrides["task"] = {{"template_id", aug_task}};
    if (!aug_pool.empty()) overrides["dataset"] = absolute_path(aug_pool);
    json aug = json::object();
    if (aug_m >= 0) aug["m"] = aug_m;
    if (!aug_policy.empty()) aug["policy"] = aug_policy;
    if (aug_tau >= 0.0) aug["tau"] = aug_tau;
    if (!aug.empty()) overrides["augmentation"] = aug;
    const std::string patch = overrides.dump();
    return finish(icl_cmd_augment(config_path.c_str(),
                                  overrides.empty() ? nullptr : patch.c_str(),
                                  output_dir.empty() ? nullptr : output_dir.c_str()));
  }

  if (score->parsed()) {
    return finish(icl_cmd_score_difficulty(
        config_path.c_str(), nullptr, output_path.empty() ? nullptr : output_path.c_str()));
  }

  if (analyze->parsed()) {
    const std::vector<const char*> paths = to_cstrs(results_paths);
    return finish(icl_cmd_analyze(config_path.c_str(), nullptr, analyze_kind.c_str(),
                                  paths.empty() ? nullptr : paths.data(), paths.size(),
                                  baseline.c_str()));
  }

  if (report->parsed()) {
    const std::vector<const char*> paths = to_cstrs(results_paths);
    return finish(icl_cmd_report(config_path.c_str(), nullptr,
                                 paths.empty() ? nullptr : paths.data(), paths.size()));
  }

  if (templates_export->parsed()) {
    return finish(icl_templates_export(template_dir.c_str()));
  }

  return 0;
}
