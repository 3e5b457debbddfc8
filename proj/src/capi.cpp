#include "iclharness.h"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "icl/analysis.hpp"
#include "icl/common.hpp"
#include "icl/corpus.hpp"
#include "icl/metrics.hpp"
#include "icl/runner.hpp"

namespace {

thread_local std::string g_last_error;

icl_status status_from(const icl::Error& err) {
  g_last_error = err.what();
  return static_cast<icl_status>(static_cast<int>(err.kind()));
}

template <typename Fn>
icl_status guarded(Fn&& fn) {
  try {
    fn();
    return ICL_OK;
  } catch (const icl::Error& err) {
    return status_from(err);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ICL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ICL_ERR_INTERNAL;
  }
}

icl_status invalid(const char* message) {
  g_last_error = message;
  return ICL_ERR_INVALID_ARGUMENT;
}

icl::TaskSpec parse_task_json(const char* task_json) {
  nlohmann::json spec = nlohmann::json::parse(task_json, nullptr, false);
  if (spec.is_discarded() || !spec.is_object()) {
    throw icl::Error(icl::ErrorKind::InvalidArgument, "task_json is not a JSON object");
  }
  icl::TaskSpec task;
  if (spec.contains("kind")) task.task_kind = icl::parse_task_kind(spec["kind"]);
  task.template_id = spec.value("template_id", std::string{});
  if (spec.contains("metric")) task.metric_id = icl::parse_metric(spec["metric"]);
  if (spec.contains("source_language")) {
    task.source_language = spec["source_language"].get<std::string>();
  }
  if (spec.contains("target_language")) {
    task.target_language = spec["target_language"].get<std::string>();
  }
  task.validate();
  return task;
}

std::vector<std::string> collect_paths(const char* const* paths, size_t count) {
  std::vector<std::string> out;
  for (size_t i = 0; i < count; ++i) {
    if (paths[i] != nullptr) out.emplace_back(paths[i]);
  }
  return out;
}

icl::ExperimentConfig load_config_for_command(const char* config_path,
                                              const char* overrides_json,
                                              const char* output_dir) {
  icl::ExperimentConfig config = icl::load_config(
      config_path, overrides_json ? std::string{overrides_json} : std::string{});
  if (output_dir != nullptr && *output_dir != '\0') {
    config.output_dir = output_dir;
  }
  return config;
}

}  // namespace

struct icl_pool {
  icl::ExamplePool pool;
};

extern "C" {

const char* icl_version(void) { return "0.1.0"; }

const char* icl_last_error(void) { return g_last_error.c_str(); }

icl_status icl_metric_chrf(const char* hypothesis, const char* reference,
                           double* out_value) {
  if (!hypothesis || !reference || !out_value) return invalid("null argument");
  return guarded([&] { *out_value = icl::chrf(hypothesis, reference).value; });
}

icl_status icl_metric_rouge_l(const char* hypothesis, const char* reference,
                              double* out_value) {
  if (!hypothesis || !reference || !out_value) return invalid("null argument");
  return guarded([&] { *out_value = icl::rouge_l(hypothesis, reference).value; });
}

icl_status icl_metric_exact_match(const char* const* predictions,
                                  const char* const* references, size_t count,
                                  double* out_value) {
  if (!predictions || !references || !out_value) return invalid("null argument");
  return guarded([&] {
    std::vector<std::string> preds, refs;
    for (size_t i = 0; i < count; ++i) {
      if (!predictions[i] || !references[i]) {
        throw icl::Error(icl::ErrorKind::InvalidArgument, "null string in input");
      }
      preds.emplace_back(predictions[i]);
      refs.emplace_back(references[i]);
    }
    *out_value = icl::exact_match_accuracy(preds, refs).value;
  });
}

icl_status icl_welch_t_test(const double* a, size_t a_len, const double* b,
                            size_t b_len, double alpha, int two_sided,
                            icl_ttest_result* out) {
  if (!a || !b || !out) return invalid("null argument");
  return guarded([&] {
    const icl::TTestResult result = icl::welch_t_test(
        std::vector<double>(a, a + a_len), std::vector<double>(b, b + b_len), alpha,
        two_sided ? icl::Alternative::TwoSided : icl::Alternative::Greater);
    out->t_statistic = result.t_statistic;
    out->degrees_of_freedom = result.degrees_of_freedom;
    out->p_value = result.p_value;
    out->significant = result.significant ? 1 : 0;
    out->alpha = result.alpha;
  });
}

icl_status icl_pool_open(const char* dataset_path, const char* task_json,
                         icl_pool** out_pool) {
  if (!dataset_path || !task_json || !out_pool) return invalid("null argument");
  *out_pool = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<icl_pool>();
    handle->pool = icl::load_dataset(dataset_path, parse_task_json(task_json));
    *out_pool = handle.release();
  });
}

size_t icl_pool_size(const icl_pool* pool) {
  return pool == nullptr ? 0 : pool->pool.size();
}

void icl_pool_free(icl_pool* pool) { delete pool; }

icl_status icl_cmd_run(const char* config_path, const char* overrides_json,
                       const char* output_dir) {
  if (!config_path) return invalid("null config path");
  return guarded([&] {
    icl::command_run(load_config_for_command(config_path, overrides_json, output_dir));
  });
}

icl_status icl_cmd_augment(const char* config_path, const char* overrides_json,
                           const char* output_dir) {
  if (!config_path) return invalid("null config path");
  return guarded([&] {
    icl::command_augment(
        load_config_for_command(config_path, overrides_json, output_dir));
  });
}

icl_status icl_cmd_score_difficulty(const char* config_path,
                                    const char* overrides_json,
                                    const char* output_path) {
  if (!config_path) return invalid("null config path");
  return guarded([&] {
    icl::command_score_difficulty(
        load_config_for_command(config_path, overrides_json, nullptr),
        output_path ? output_path : "");
  });
}

icl_status icl_cmd_analyze(const char* config_path, const char* overrides_json,
                           const char* kind, const char* const* results_paths,
                           size_t results_count, const char* baseline_method) {
  if (!config_path || !kind) return invalid("null argument");
  return guarded([&] {
    std::vector<std::string> paths;
    if (results_paths != nullptr) paths = collect_paths(results_paths, results_count);
    icl::command_analyze(load_config_for_command(config_path, overrides_json, nullptr),
                         kind, paths, baseline_method ? baseline_method : "");
  });
}

icl_status icl_cmd_report(const char* config_path, const char* overrides_json,
                          const char* const* results_paths, size_t results_count) {
  if (!config_path) return invalid("null config path");
  return guarded([&] {
    std::vector<std::string> paths;
    if (results_paths != nullptr) paths = collect_paths(results_paths, results_count);
    icl::command_report(load_config_for_command(config_path, overrides_json, nullptr),
                        paths);
  });
}

icl_status icl_templates_export(const char* dir) {
  if (!dir) return invalid("null directory");
  return guarded([&] {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& content) {
      std::ofstream out(std::string{dir} + "/" + name, std::ios::binary);
      if (!out) {
        throw icl::Error(icl::ErrorKind::Io, "cannot write template file: " + name);
      }
      out << content << '\n';
    };
    for (const std::string& id : icl::builtin_template_ids()) {
      const icl::PromptTemplate& tmpl = icl::builtin_template(id);
      write(id + ".body.txt", tmpl.body);
      write(id + ".example.txt", tmpl.example_format);
    }
    write("augmentation-generation.txt", icl::generation_template());
    write("augmentation-filtering.txt", icl::filtering_template());
    write("difficulty-rating.txt", icl::difficulty_template());
  });
}

}  // extern "C"
