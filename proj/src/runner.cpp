#include "icl/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "icl/common.hpp"
#include "icl/metrics.hpp"
#include "icl/prng.hpp"

namespace icl {

namespace {

using nlohmann::json;

// Stream id separating the order-policy shuffle from selection draws.
constexpr std::uint64_t kOrderShuffleStream = 0x4f524452ULL;

std::string lower_kebab(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (c == '_' || c == '-' || c == ' ') continue;
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

std::string format_double(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

std::string ratio_key(double ratio) { return format_double(ratio, 6); }

}  // namespace

Strategy parse_strategy(const std::string& name) {
  const std::string n = lower_kebab(name);
  if (n == "random" || n == "naive") return Strategy::Random;
  if (n == "relevance") return Strategy::Relevance;
  if (n == "diversity") return Strategy::Diversity;
  if (n == "curriculum") return Strategy::Curriculum;
  if (n == "hard") return Strategy::Hard;
  throw Error(ErrorKind::InvalidConfig, "unknown strategy: " + name);
}

const char* strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::Random: return "Random";
    case Strategy::Relevance: return "Relevance";
    case Strategy::Diversity: return "Diversity";
    case Strategy::Curriculum: return "Curriculum";
    case Strategy::Hard: return "Hard";
  }
  return "?";
}

TaskKind parse_task_kind(const std::string& name) {
  const std::string n = lower_kebab(name);
  if (n == "translation") return TaskKind::Translation;
  if (n == "summarization") return TaskKind::Summarization;
  if (n == "reasoning") return TaskKind::Reasoning;
  if (n == "classification") return TaskKind::Classification;
  throw Error(ErrorKind::InvalidConfig, "unknown task kind: " + name);
}

const char* task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::Translation: return "Translation";
    case TaskKind::Summarization: return "Summarization";
    case TaskKind::Reasoning: return "Reasoning";
    case TaskKind::Classification: return "Classification";
  }
  return "?";
}

MetricId parse_metric(const std::string& name) {
  const std::string n = lower_kebab(name);
  if (n == "chrf") return MetricId::ChrF;
  if (n == "rougel") return MetricId::RougeL;
  if (n == "exactmatch") return MetricId::ExactMatch;
  throw Error(ErrorKind::InvalidConfig, "unknown metric: " + name);
}

const char* metric_name(MetricId metric) {
  switch (metric) {
    case MetricId::ChrF: return "ChrF";
    case MetricId::RougeL: return "RougeL";
    case MetricId::ExactMatch: return "ExactMatch";
  }
  return "?";
}

OrderPolicy parse_order_policy(const std::string& name) {
  const std::string n = lower_kebab(name);
  if (n == "asselected") return OrderPolicy::AsSelected;
  if (n == "randomorder") return OrderPolicy::RandomOrder;
  if (n == "nearestfirst") return OrderPolicy::NearestFirst;
  if (n == "nearestlast") return OrderPolicy::NearestLast;
  throw Error(ErrorKind::InvalidConfig, "unknown order policy: " + name);
}

const char* order_policy_name(OrderPolicy policy) {
  switch (policy) {
    case OrderPolicy::AsSelected: return "AsSelected";
    case OrderPolicy::RandomOrder: return "RandomOrder";
    case OrderPolicy::NearestFirst: return "NearestFirst";
    case OrderPolicy::NearestLast: return "NearestLast";
  }
  return "?";
}

FilterMode parse_filter_mode(const std::string& name) {
  const std::string n = lower_kebab(name);
  if (n == "medianhalf") return FilterMode::MedianHalf;
  if (n == "explicitthreshold" || n == "threshold") return FilterMode::ExplicitThreshold;
  throw Error(ErrorKind::InvalidConfig, "unknown filter mode: " + name);
}

const char* filter_mode_name(FilterMode mode) {
  return mode == FilterMode::MedianHalf ? "MedianHalf" : "ExplicitThreshold";
}

// --- Config ------------------------------------------------------------------

void ExperimentConfig::validate() const {
  task.validate();
  if (runs < 1) throw Error(ErrorKind::InvalidConfig, "runs must be >= 1");
  if (!doubling_shots && shots.empty()) {
    throw Error(ErrorKind::InvalidConfig, "shots must be nonempty or 'doubling'");
  }
  for (std::size_t s : shots) {
    if (s < 1) throw Error(ErrorKind::InvalidConfig, "shot counts must be >= 1");
  }
  if (plan.k < 1) throw Error(ErrorKind::InvalidConfig, "plan.k must be >= 1");
  if (noise && (noise->ratio < 0.0 || noise->ratio > 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "noise ratio must be in [0,1]");
  }
  for (double r : noise_sweep) {
    if (r < 0.0 || r > 1.0) {
      throw Error(ErrorKind::InvalidConfig, "noise ratio must be in [0,1]");
    }
  }
  if (augmentation) augmentation->policy.validate();
  if (dataset_path.empty()) {
    throw Error(ErrorKind::InvalidConfig, "dataset path is required");
  }
}

namespace {

std::string resolve_path(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty()) return path;
  if (std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_dir) / path).string();
}

json config_to_canonical_json(const ExperimentConfig& c) {
  json task{{"kind", task_kind_name(c.task.task_kind)},
            {"template_id", c.task.template_id},
            {"metric", metric_name(c.task.metric_id)}};
  if (c.task.source_language) task["source_language"] = *c.task.source_language;
  if (c.task.target_language) task["target_language"] = *c.task.target_language;

  json backend{{"kind", c.backend.kind},
               {"embedding_seed", c.backend.embedding_seed},
               {"embedding_dim", c.backend.embedding_dim}};
  if (!c.backend.exact.empty()) backend["exact"] = c.backend.exact;
  if (!c.backend.contains.empty()) {
    json rules = json::array();
    for (const auto& [pattern, reply] : c.backend.contains) {
      rules.push_back(json::array({pattern, reply}));
    }
    backend["contains"] = rules;
  }
  if (!c.backend.sequence.empty()) backend["sequence"] = c.backend.sequence;
  if (c.backend.kind == "http") {
    backend["base_url"] = c.backend.http.base_url;
    backend["model"] = c.backend.http.model;
    backend["completion_path"] = c.backend.http.completion_path;
    backend["embedding_model"] = c.backend.http.embedding_model;
  }

  json root{{"task", task},
            {"dataset", c.dataset_path},
            {"queries", c.query_path},
            {"backend", backend},
            {"plan",
             {{"strategy", strategy_name(c.plan.strategy)},
              {"k", c.plan.k},
              {"order", order_policy_name(c.plan.order)},
              {"seed", c.plan.seed}}},
            {"runs", c.runs},
            {"seed", c.seed},
            {"context_limit_tokens", c.context_limit_tokens},
            {"max_output_tokens", c.max_output_tokens},
            {"difficulty_trials", c.difficulty_trials}};
  if (c.doubling_shots) {
    root["shots"] = "doubling";
  } else {
    root["shots"] = c.shots;
  }
  if (c.noise) root["noise"] = {{"ratio", c.noise->ratio}, {"seed", c.noise->seed}};
  if (!c.noise_sweep.empty()) root["noise_sweep"] = c.noise_sweep;
  if (c.augmentation) {
    json aug{{"m", c.augmentation->m},
             {"ctx", c.augmentation->ctx},
             {"trials", c.augmentation->trials},
             {"rating_ctx", c.augmentation->rating_ctx},
             {"policy", filter_mode_name(c.augmentation->policy.mode)}};
    if (c.augmentation->policy.tau) aug["tau"] = *c.augmentation->policy.tau;
    root["augmentation"] = aug;
  }
  if (!c.augmented_pool_path.empty()) root["augmented_pool"] = c.augmented_pool_path;
  if (!c.difficulty_scores_path.empty()) {
    root["difficulty_scores"] = c.difficulty_scores_path;
  }
  return root;
}

}  // namespace

std::string config_fingerprint(const ExperimentConfig& config) {
  const std::uint64_t hash = fnv1a64(config_to_canonical_json(config).dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ExperimentConfig parse_config_json(const std::string& json_text,
                                   const std::string& base_dir) {
  json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    throw Error(ErrorKind::InvalidConfig, "config is not a JSON object");
  }
  ExperimentConfig c;
  try {
    if (root.contains("task")) {
      const json& task = root["task"];
      if (task.contains("kind")) c.task.task_kind = parse_task_kind(task["kind"]);
      c.task.template_id = task.value("template_id", std::string{});
      if (task.contains("metric")) c.task.metric_id = parse_metric(task["metric"]);
      if (task.contains("source_language")) {
        c.task.source_language = task["source_language"].get<std::string>();
      }
      if (task.contains("target_language")) {
        c.task.target_language = task["target_language"].get<std::string>();
      }
    }
    c.dataset_path = resolve_path(root.value("dataset", std::string{}), base_dir);
    c.query_path = resolve_path(root.value("queries", std::string{}), base_dir);
    if (root.contains("backend")) {
      const json& b = root["backend"];
      c.backend.kind = b.value("kind", std::string{"echo"});
      if (b.contains("exact")) {
        c.backend.exact = b["exact"].get<std::map<std::string, std::string>>();
      }
      if (b.contains("contains")) {
        for (const json& rule : b["contains"]) {
          c.backend.contains.emplace_back(rule.at(0).get<std::string>(),
                                          rule.at(1).get<std::string>());
        }
      }
      if (b.contains("sequence")) {
        c.backend.sequence = b["sequence"].get<std::vector<std::string>>();
      }
      c.backend.http.base_url = b.value("base_url", std::string{});
      c.backend.http.model = b.value("model", std::string{});
      c.backend.http.completion_path =
          b.value("completion_path", c.backend.http.completion_path);
      c.backend.http.embedding_path =
          b.value("embedding_path", c.backend.http.embedding_path);
      c.backend.http.embedding_model = b.value("embedding_model", std::string{});
      c.backend.http.api_key_env = b.value("api_key_env", c.backend.http.api_key_env);
      c.backend.embedding_seed = b.value("embedding_seed", std::uint64_t{0});
      c.backend.embedding_dim = b.value("embedding_dim", std::size_t{64});
    }
    if (root.contains("gateway")) {
      const json& g = root["gateway"];
      c.gateway.parallelism = g.value("parallelism", 4);
      c.gateway.max_attempts = g.value("max_attempts", 3);
      c.gateway.backoff_base_ms = g.value("backoff_ms", 1000);
    }
    if (root.contains("plan")) {
      const json& p = root["plan"];
      if (p.contains("strategy")) c.plan.strategy = parse_strategy(p["strategy"]);
      c.plan.k = p.value("k", std::size_t{1});
      if (p.contains("order")) c.plan.order = parse_order_policy(p["order"]);
      c.plan.seed = p.value("seed", std::uint64_t{0});
    }
    if (root.contains("shots")) {
      if (root["shots"].is_string()) {
        if (root["shots"].get<std::string>() != "doubling") {
          throw Error(ErrorKind::InvalidConfig, "shots must be a list or 'doubling'");
        }
        c.doubling_shots = true;
      } else {
        c.shots = root["shots"].get<std::vector<std::size_t>>();
      }
    } else {
      c.shots = {c.plan.k};
    }
    c.runs = root.value("runs", 1);
    if (root.contains("noise")) {
      NoisePlan plan;
      plan.ratio = root["noise"].value("ratio", 0.0);
      plan.seed = root["noise"].value("seed", std::uint64_t{0});
      c.noise = plan;
    }
    if (root.contains("noise_sweep")) {
      c.noise_sweep = root["noise_sweep"].get<std::vector<double>>();
    }
    if (root.contains("augmentation")) {
      const json& a = root["augmentation"];
      AugmentationConfig aug;
      aug.m = a.value("m", std::size_t{3000});
      aug.ctx = a.value("ctx", std::size_t{32});
      aug.trials = a.value("trials", 30);
      aug.rating_ctx = a.value("rating_ctx", std::size_t{30});
      if (a.contains("policy")) aug.policy.mode = parse_filter_mode(a["policy"]);
      if (a.contains("tau")) aug.policy.tau = a["tau"].get<double>();
      c.augmentation = aug;
    }
    c.augmented_pool_path =
        resolve_path(root.value("augmented_pool", std::string{}), base_dir);
    c.difficulty_scores_path =
        resolve_path(root.value("difficulty_scores", std::string{}), base_dir);
    c.difficulty_trials = root.value("difficulty_trials", 30);
    c.seed = root.value("seed", std::uint64_t{0});
    c.context_limit_tokens = root.value("context_limit_tokens", std::uint64_t{1048576});
    c.max_output_tokens = root.value("max_output_tokens", 1024);
    c.output_dir = resolve_path(root.value("output_dir", std::string{"out"}), base_dir);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string{"config field error: "} + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  return load_config(path, std::string{});
}

ExperimentConfig load_config(const std::string& path,
                             const std::string& overrides_json) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (!overrides_json.empty()) {
    json base = json::parse(text, nullptr, false);
    if (base.is_discarded()) {
      throw Error(ErrorKind::InvalidConfig, "config is not valid JSON: " + path);
    }
    json patch = json::parse(overrides_json, nullptr, false);
    if (patch.is_discarded()) {
      throw Error(ErrorKind::InvalidConfig, "override patch is not valid JSON");
    }
    base.merge_patch(patch);
    text = base.dump();
  }
  return parse_config_json(text,
                           std::filesystem::path(path).parent_path().string());
}

// --- Backend / gateway construction -------------------------------------------

std::shared_ptr<Backend> make_backend(const BackendSpec& spec,
                                      const ExamplePool* copycat_pool) {
  std::shared_ptr<Backend> backend;
  if (spec.kind == "echo") {
    backend = std::make_shared<EchoBackend>();
  } else if (spec.kind == "scripted") {
    auto scripted = std::make_shared<ScriptedBackend>();
    scripted->exact = spec.exact;
    scripted->contains = spec.contains;
    scripted->sequence = spec.sequence;
    backend = scripted;
  } else if (spec.kind == "copycat") {
    if (copycat_pool == nullptr) {
      throw Error(ErrorKind::InvalidConfig, "copycat backend requires a pool");
    }
    backend = std::make_shared<CopycatBackend>(copycat_pool->examples);
  } else if (spec.kind == "http") {
    backend = std::make_shared<HttpBackend>(spec.http);
  } else {
    throw Error(ErrorKind::InvalidConfig, "unknown backend kind: " + spec.kind);
  }
  backend->embedding_seed = spec.embedding_seed;
  backend->embedding_dim = spec.embedding_dim;
  return backend;
}

std::unique_ptr<Gateway> make_gateway(const ExperimentConfig& config,
                                      const ExamplePool* copycat_pool) {
  GatewayConfig gw;
  gw.max_parallel = config.gateway.parallelism;
  gw.max_attempts = config.gateway.max_attempts;
  gw.backoff_base_ms = config.gateway.backoff_base_ms;
  gw.seed = config.seed;
  return std::make_unique<Gateway>(make_backend(config.backend, copycat_pool), gw);
}

// --- Experiment execution ------------------------------------------------------

namespace {

std::vector<std::string> repeat_cyclic(const std::vector<std::string>& ids,
                                       std::size_t shot) {
  std::vector<std::string> out;
  out.reserve(shot);
  for (std::size_t i = 0; i < shot; ++i) out.push_back(ids[i % ids.size()]);
  return out;
}

double average_example_tokens(const ExamplePool& pool, const PromptTemplate& tmpl) {
  double total = 0.0;
  for (const Example& e : pool.examples) {
    total += static_cast<double>(count_tokens(render_example(tmpl, pool.task, e)).value);
  }
  return total / static_cast<double>(pool.size());
}

struct ResumeLog {
  std::map<std::string, RunRecord> records;

  static std::string key(int run, std::size_t shot, double ratio,
                         const std::string& query_id) {
    return std::to_string(run) + "|" + std::to_string(shot) + "|" +
           ratio_key(ratio) + "|" + query_id;
  }
};

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::string pool_path = config.augmented_pool_path.empty()
                                    ? config.dataset_path
                                    : config.augmented_pool_path;
  const ExamplePool pool = load_dataset(pool_path, config.task);
  if (config.query_path.empty()) {
    throw Error(ErrorKind::InvalidConfig, "query path is required to run");
  }
  const ExamplePool queries = load_dataset(config.query_path, config.task);
  const PromptTemplate& tmpl = builtin_template(config.task.template_id);
  std::unique_ptr<Gateway> gateway = make_gateway(config, &pool);

  const Strategy strategy = config.plan.strategy;
  const bool needs_pool_embeddings = strategy == Strategy::Relevance ||
                                     strategy == Strategy::Diversity ||
                                     config.plan.order == OrderPolicy::NearestFirst ||
                                     config.plan.order == OrderPolicy::NearestLast;
  const bool needs_query_embeddings = strategy == Strategy::Relevance ||
                                      config.plan.order == OrderPolicy::NearestFirst ||
                                      config.plan.order == OrderPolicy::NearestLast;
  EmbeddingSet pool_embs;
  if (needs_pool_embeddings) pool_embs = embed_pool(*gateway, pool);
  std::vector<EmbeddingVector> query_embs;
  if (needs_query_embeddings) {
    std::vector<std::string> texts;
    for (const Example& q : queries.examples) texts.push_back(q.input);
    query_embs = gateway->embed(texts);
  }

  std::vector<DifficultyScore> difficulty;
  if (strategy == Strategy::Curriculum || strategy == Strategy::Hard) {
    if (!config.difficulty_scores_path.empty()) {
      difficulty = load_difficulty_scores(config.difficulty_scores_path);
    } else {
      difficulty = score_difficulty(pool, *gateway, config.difficulty_trials);
    }
  }

  std::vector<std::size_t> shots = config.shots;
  if (config.doubling_shots) {
    shots.clear();
    for (const UtilizationStep& step :
         utilization_schedule(pool.size(), config.context_limit_tokens,
                              average_example_tokens(pool, tmpl))) {
      shots.push_back(step.shot_count);
    }
  }

  std::vector<double> noise_ratios;
  bool noise_enabled = false;
  std::uint64_t noise_seed = 0;
  if (!config.noise_sweep.empty()) {
    noise_ratios = config.noise_sweep;
    noise_enabled = true;
    noise_seed = config.noise ? config.noise->seed : config.seed;
  } else if (config.noise) {
    noise_ratios = {config.noise->ratio};
    noise_enabled = true;
    noise_seed = config.noise->seed;
  } else {
    noise_ratios = {0.0};
  }

  ExperimentOutcome outcome;
  outcome.fingerprint = config_fingerprint(config);

  ResumeLog resume;
  const std::string results_path =
      (std::filesystem::path(config.output_dir) / "results.jsonl").string();
  if (std::filesystem::exists(results_path)) {
    for (RunRecord& old : load_results_jsonl(results_path)) {
      if (old.fingerprint != outcome.fingerprint) continue;
      resume.records[ResumeLog::key(old.run_index, old.shot_count, old.noise_ratio,
                                    old.query_id)] = std::move(old);
    }
  }

  std::map<std::string, const Example*> pool_by_id;
  for (const Example& e : pool.examples) pool_by_id[e.id] = &e;

  const bool shared_prefix_plan =
      strategy_is_query_independent(strategy) &&
      config.plan.order != OrderPolicy::NearestFirst &&
      config.plan.order != OrderPolicy::NearestLast;

  for (const double ratio : noise_ratios) {
    for (int run = 0; run < config.runs; ++run) {
      const std::uint64_t run_seed = config.seed + static_cast<std::uint64_t>(run);
      for (const std::size_t shot : shots) {
        const std::size_t k_eff = std::min(shot, pool.size());

        // Shared demo sequence for query-independent strategies.
        std::vector<Example> shared_demos;
        if (shared_prefix_plan) {
          Selection sel;
          switch (strategy) {
            case Strategy::Random:
              sel = select_random(pool, k_eff, run_seed);
              break;
            case Strategy::Diversity:
              sel = select_diverse(pool_embs, k_eff, run_seed);
              break;
            case Strategy::Curriculum:
              sel = select_by_difficulty(pool, difficulty, k_eff,
                                         DifficultyMode::Curriculum, run_seed);
              break;
            case Strategy::Hard:
              sel = select_by_difficulty(pool, difficulty, k_eff,
                                         DifficultyMode::Hard, run_seed);
              break;
            case Strategy::Relevance:
              break;
          }
          if (config.plan.order == OrderPolicy::RandomOrder) {
            SplitMix64 rng(run_seed ^ kOrderShuffleStream);
            const std::vector<std::size_t> perm =
                partial_shuffle(sel.demo_ids.size(), sel.demo_ids.size(), rng);
            std::vector<std::string> shuffled;
            for (std::size_t i : perm) shuffled.push_back(sel.demo_ids[i]);
            sel.demo_ids = std::move(shuffled);
          }
          const std::vector<std::string> ids = repeat_cyclic(sel.demo_ids, shot);
          shared_demos.reserve(ids.size());
          for (const std::string& id : ids) shared_demos.push_back(*pool_by_id.at(id));
          if (noise_enabled) {
            shared_demos = inject_noise(
                shared_demos,
                NoisePlan{ratio, noise_seed + static_cast<std::uint64_t>(run)});
          }
        }

        // Render everything first; prompts are pure and the prefix invariant
        // is checked against the rendered parts.
        std::vector<RenderedPrompt> rendered(queries.size());
        for (std::size_t q = 0; q < queries.size(); ++q) {
          std::vector<Example> demos;
          if (shared_prefix_plan) {
            demos = shared_demos;
          } else {
            Selection sel = strategy == Strategy::Relevance
                                ? select_relevant(pool_embs, query_embs[q], k_eff)
                                : select_random(pool, k_eff, run_seed);
            if (config.plan.order == OrderPolicy::NearestFirst ||
                config.plan.order == OrderPolicy::NearestLast) {
              sel = order_by_similarity(sel, pool_embs, query_embs[q],
                                        config.plan.order == OrderPolicy::NearestFirst
                                            ? SimilarityDirection::NearestFirst
                                            : SimilarityDirection::NearestLast);
            } else if (config.plan.order == OrderPolicy::RandomOrder) {
              SplitMix64 rng(run_seed ^ kOrderShuffleStream ^
                             fnv1a64(queries.examples[q].id));
              const std::vector<std::size_t> perm =
                  partial_shuffle(sel.demo_ids.size(), sel.demo_ids.size(), rng);
              std::vector<std::string> shuffled;
              for (std::size_t i : perm) shuffled.push_back(sel.demo_ids[i]);
              sel.demo_ids = std::move(shuffled);
            }
            const std::vector<std::string> ids = repeat_cyclic(sel.demo_ids, shot);
            demos.reserve(ids.size());
            for (const std::string& id : ids) demos.push_back(*pool_by_id.at(id));
            if (noise_enabled) {
              demos = inject_noise(
                  demos, NoisePlan{ratio, (noise_seed + static_cast<std::uint64_t>(run)) ^
                                              fnv1a64(queries.examples[q].id)});
            }
          }
          rendered[q] = render_prompt_parts(tmpl, config.task, demos,
                                            queries.examples[q]);
        }
        if (shared_prefix_plan) {
          for (std::size_t q = 1; q < rendered.size(); ++q) {
            if (rendered[q].prefix != rendered[0].prefix) {
              throw Error(ErrorKind::InvalidArgument,
                          "demo prefix differs across queries for a "
                          "query-independent plan");
            }
          }
        }

        // Execute queries, bounded by the gateway parallelism. Slots keep the
        // record stream in query order regardless of completion order.
        std::vector<RunRecord> slot(queries.size());
        std::vector<bool> resumed(queries.size(), false);
        for (std::size_t q = 0; q < queries.size(); ++q) {
          const auto it = resume.records.find(ResumeLog::key(
              run, shot, ratio, queries.examples[q].id));
          if (it != resume.records.end()) {
            slot[q] = it->second;
            resumed[q] = true;
          }
        }
        std::atomic<std::size_t> next{0};
        std::exception_ptr worker_error;
        std::mutex error_mutex;
        auto worker = [&] {
          for (;;) {
            const std::size_t q = next.fetch_add(1);
            if (q >= queries.size()) return;
            if (resumed[q]) continue;
            const Example& query = queries.examples[q];
            RunRecord rec;
            rec.fingerprint = outcome.fingerprint;
            rec.run_index = run;
            rec.shot_count = shot;
            rec.noise_ratio = ratio;
            rec.query_id = query.id;
            rec.strategy = strategy_name(strategy);
            rec.dataset = pool_path;
            rec.task_kind = task_kind_name(config.task.task_kind);
            rec.metric = metric_name(config.task.metric_id);
            try {
              CompletionRequest req;
              req.prompt = rendered[q].text();
              req.temperature = 0.0;
              req.max_output_tokens = config.max_output_tokens;
              req.seed = run_seed;
              const CompletionResponse resp = gateway->complete(req);
              rec.prediction = resp.text;
              rec.prompt_tokens = resp.prompt_tokens.value;
              rec.prompt_tokens_reported =
                  resp.prompt_tokens.method == TokenCountMethod::BackendReported;
              rec.output_tokens = resp.output_tokens.value;
              rec.latency_ms = resp.latency_ms;
              rec.score =
                  score_pair(config.task.metric_id, resp.text, query.output).value;
            } catch (const Error&) {
              rec.failed = true;
              rec.prediction.clear();
              rec.score = 0.0;
            } catch (...) {
              std::lock_guard lock(error_mutex);
              if (!worker_error) worker_error = std::current_exception();
              return;
            }
            slot[q] = std::move(rec);
          }
        };
        const std::size_t n_threads = std::max<std::size_t>(
            1, std::min<std::size_t>(config.gateway.parallelism, queries.size()));
        if (n_threads == 1) {
          worker();
        } else {
          std::vector<std::thread> threads;
          for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
          for (std::thread& t : threads) t.join();
        }
        if (worker_error) std::rethrow_exception(worker_error);

        for (std::size_t q = 0; q < queries.size(); ++q) {
          outcome.records.push_back(slot[q]);
          if (!resumed[q]) outcome.new_records.push_back(slot[q]);
        }
      }
    }
  }

  outcome.aggregates = aggregate(outcome.records);
  return outcome;
}

std::vector<AggregateResult> aggregate(const std::vector<RunRecord>& records) {
  if (records.empty()) {
    throw Error(ErrorKind::EmptyRecords, "no records to aggregate");
  }
  struct Key {
    std::string fingerprint;
    std::size_t shot;
    std::string ratio;
    bool operator<(const Key& o) const {
      return std::tie(fingerprint, ratio, shot) < std::tie(o.fingerprint, o.ratio, o.shot);
    }
  };
  struct Group {
    std::map<int, std::vector<double>> per_run_scores;
    std::size_t excluded = 0;
    double token_sum = 0.0;
    std::size_t token_count = 0;
    const RunRecord* sample = nullptr;
    double ratio = 0.0;
  };
  std::map<Key, Group> groups;
  for (const RunRecord& rec : records) {
    Group& g = groups[{rec.fingerprint, rec.shot_count, ratio_key(rec.noise_ratio)}];
    g.sample = &rec;
    g.ratio = rec.noise_ratio;
    if (rec.failed) {
      ++g.excluded;
      g.per_run_scores[rec.run_index];
    } else {
      g.per_run_scores[rec.run_index].push_back(rec.score);
      g.token_sum += static_cast<double>(rec.prompt_tokens);
      ++g.token_count;
    }
  }

  std::vector<AggregateResult> out;
  for (const auto& [key, group] : groups) {
    AggregateResult agg;
    agg.fingerprint = key.fingerprint;
    agg.shot_count = key.shot;
    agg.noise_ratio = group.ratio;
    agg.excluded = group.excluded;
    agg.strategy = group.sample->strategy;
    agg.dataset = group.sample->dataset;
    agg.task_kind = group.sample->task_kind;
    agg.metric = group.sample->metric;
    for (const auto& [run, scores] : group.per_run_scores) {
      if (scores.empty()) continue;  // run lost every query to failures
      agg.per_run_means.push_back(
          std::accumulate(scores.begin(), scores.end(), 0.0) /
          static_cast<double>(scores.size()));
    }
    agg.n_runs = static_cast<int>(agg.per_run_means.size());
    if (agg.n_runs > 0) {
      agg.mean = std::accumulate(agg.per_run_means.begin(), agg.per_run_means.end(),
                                 0.0) /
                 agg.n_runs;
      double var = 0.0;
      for (double m : agg.per_run_means) var += (m - agg.mean) * (m - agg.mean);
      agg.std_dev = std::sqrt(var / agg.n_runs);  // population std across runs
    }
    if (group.token_count > 0) {
      agg.mean_prompt_tokens = group.token_sum / static_cast<double>(group.token_count);
    }
    out.push_back(std::move(agg));
  }
  return out;
}

// --- Results persistence -------------------------------------------------------

void append_results_jsonl(const std::vector<RunRecord>& records,
                          const std::string& path) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot write results log: " + path);
  }
  for (const RunRecord& rec : records) {
    json row{{"fingerprint", rec.fingerprint},
             {"run_index", rec.run_index},
             {"shot_count", rec.shot_count},
             {"noise_ratio", rec.noise_ratio},
             {"query_id", rec.query_id},
             {"prediction", rec.prediction},
             {"failed", rec.failed},
             {"score", rec.score},
             {"prompt_tokens", rec.prompt_tokens},
             {"prompt_tokens_reported", rec.prompt_tokens_reported},
             {"output_tokens", rec.output_tokens},
             {"latency_ms", rec.latency_ms},
             {"strategy", rec.strategy},
             {"dataset", rec.dataset},
             {"task_kind", rec.task_kind},
             {"metric", rec.metric}};
    out << row.dump() << '\n';
  }
}

std::vector<RunRecord> load_results_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open results log: " + path);
  }
  std::vector<RunRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object()) {
      throw Error(ErrorKind::MalformedRecord,
                  "malformed results row at line " + std::to_string(line_no));
    }
    RunRecord rec;
    rec.fingerprint = row.value("fingerprint", std::string{});
    rec.run_index = row.value("run_index", 0);
    rec.shot_count = row.value("shot_count", std::size_t{0});
    rec.noise_ratio = row.value("noise_ratio", 0.0);
    rec.query_id = row.value("query_id", std::string{});
    rec.prediction = row.value("prediction", std::string{});
    rec.failed = row.value("failed", false);
    rec.score = row.value("score", 0.0);
    rec.prompt_tokens = row.value("prompt_tokens", std::uint64_t{0});
    rec.prompt_tokens_reported = row.value("prompt_tokens_reported", false);
    rec.output_tokens = row.value("output_tokens", std::uint64_t{0});
    rec.latency_ms = row.value("latency_ms", 0.0);
    rec.strategy = row.value("strategy", std::string{});
    rec.dataset = row.value("dataset", std::string{});
    rec.task_kind = row.value("task_kind", std::string{});
    rec.metric = row.value("metric", std::string{});
    records.push_back(std::move(rec));
  }
  return records;
}

// --- Reporting -------------------------------------------------------------------

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot write file: " + path);
  }
  out << content;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace

void write_report(const std::vector<AggregateResult>& aggregates,
                  const std::optional<SignificanceMatrix>& significance,
                  const ExperimentConfig& config, const std::string& out_dir) {
  if (aggregates.empty()) {
    throw Error(ErrorKind::EmptyRecords, "no aggregates to report");
  }
  std::vector<AggregateResult> sorted = aggregates;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const AggregateResult& a, const AggregateResult& b) {
                     return std::tie(a.strategy, a.dataset, a.noise_ratio, a.shot_count) <
                            std::tie(b.strategy, b.dataset, b.noise_ratio, b.shot_count);
                   });

  // aggregates.csv
  {
    std::ostringstream csv;
    csv << "fingerprint,strategy,dataset,task,metric,shot_count,noise_ratio,n_runs,"
           "mean,std,excluded,mean_prompt_tokens,utilization\n";
    for (const AggregateResult& a : sorted) {
      csv << a.fingerprint << ',' << csv_escape(a.strategy) << ','
          << csv_escape(a.dataset) << ',' << csv_escape(a.task_kind) << ','
          << csv_escape(a.metric) << ',' << a.shot_count << ','
          << format_double(a.noise_ratio, 6) << ',' << a.n_runs << ','
          << format_double(a.mean, 6) << ',' << format_double(a.std_dev, 6) << ','
          << a.excluded << ',' << format_double(a.mean_prompt_tokens, 1) << ','
          << format_double(a.mean_prompt_tokens /
                               static_cast<double>(config.context_limit_tokens),
                           6)
          << '\n';
    }
    write_file(out_dir + "/aggregates.csv", csv.str());
  }

  // Plot-ready curves.
  {
    std::set<std::string> ratios;
    for (const AggregateResult& a : sorted) ratios.insert(ratio_key(a.noise_ratio));
    const std::string base_ratio = *ratios.begin();

    std::ostringstream shots_csv;
    shots_csv << "shot_count,mean,std\n";
    for (const AggregateResult& a : sorted) {
      if (ratio_key(a.noise_ratio) == base_ratio) {
        shots_csv << a.shot_count << ',' << format_double(a.mean, 6) << ','
                  << format_double(a.std_dev, 6) << '\n';
      }
    }
    write_file(out_dir + "/curves/shots.csv", shots_csv.str());

    if (ratios.size() > 1) {
      std::size_t max_shot = 0;
      for (const AggregateResult& a : sorted) max_shot = std::max(max_shot, a.shot_count);
      double baseline_mean = 0.0;
      for (const AggregateResult& a : sorted) {
        if (a.shot_count == max_shot && ratio_key(a.noise_ratio) == base_ratio) {
          baseline_mean = a.mean;
        }
      }
      std::ostringstream noise_csv;
      noise_csv << "noise_ratio,mean,std,relative\n";
      std::vector<const AggregateResult*> rows;
      for (const AggregateResult& a : sorted) {
        if (a.shot_count == max_shot) rows.push_back(&a);
      }
      std::stable_sort(rows.begin(), rows.end(),
                       [](const AggregateResult* a, const AggregateResult* b) {
                         return a->noise_ratio < b->noise_ratio;
                       });
      for (const AggregateResult* a : rows) {
        const double rel = baseline_mean > 0.0 ? a->mean / baseline_mean : 0.0;
        noise_csv << format_double(a->noise_ratio, 6) << ','
                  << format_double(a->mean, 6) << ',' << format_double(a->std_dev, 6)
                  << ',' << format_double(rel, 6) << '\n';
      }
      write_file(out_dir + "/curves/noise.csv", noise_csv.str());
    }

    std::set<std::size_t> shot_values;
    for (const AggregateResult& a : sorted) shot_values.insert(a.shot_count);
    if (shot_values.size() > 1) {
      double best_mean = 0.0;
      for (const AggregateResult& a : sorted) {
        if (ratio_key(a.noise_ratio) == base_ratio) best_mean = std::max(best_mean, a.mean);
      }
      std::ostringstream util_csv;
      util_csv << "shot_count,utilization,mean,std,relative\n";
      for (const AggregateResult& a : sorted) {
        if (ratio_key(a.noise_ratio) != base_ratio) continue;
        const double util = a.mean_prompt_tokens /
                            static_cast<double>(config.context_limit_tokens);
        const double rel = best_mean > 0.0 ? a.mean / best_mean : 0.0;
        util_csv << a.shot_count << ',' << format_double(util, 6) << ','
                 << format_double(a.mean, 6) << ',' << format_double(a.std_dev, 6)
                 << ',' << format_double(rel, 6) << '\n';
      }
      write_file(out_dir + "/curves/utilization.csv", util_csv.str());
    }
  }

  // report.md
  {
    std::ostringstream md;
    md << "# Experiment report\n\n";
    md << "- dataset: " << config.dataset_path << "\n";
    md << "- queries: " << config.query_path << "\n";
    md << "- strategy: " << strategy_name(config.plan.strategy) << "\n";
    md << "- metric: " << metric_name(config.task.metric_id) << "\n";
    md << "- runs: " << config.runs << "\n";
    md << "- seed: " << config.seed << "\n";
    md << "- fingerprint: " << sorted.front().fingerprint << "\n";
    std::size_t excluded = 0;
    for (const AggregateResult& a : sorted) excluded += a.excluded;
    if (excluded > 0) {
      md << "- excluded failed queries: " << excluded << "\n";
    }
    md << "\n## Results\n\n";
    md << "| Strategy | Shots | Noise ratio | Score (mean \xc2\xb1 std) | Runs |\n";
    md << "| --- | --- | --- | --- | --- |\n";
    for (const AggregateResult& a : sorted) {
      md << "| " << a.strategy << " | " << a.shot_count << " | "
         << format_double(a.noise_ratio, 3) << " | " << format_double(a.mean, 3)
         << " \xc2\xb1 " << format_double(a.std_dev, 3) << " | " << a.n_runs
         << " |\n";
    }
    if (significance.has_value()) {
      md << "\n## Significant wins over " << significance->baseline << " (alpha = "
         << format_double(significance->alpha, 2) << ")\n\n";
      md << format_significance_markdown(*significance);
    }
    write_file(out_dir + "/report.md", md.str());
  }
}

// --- Commands ----------------------------------------------------------------------

ExperimentOutcome command_run(const ExperimentConfig& config) {
  ExperimentOutcome outcome = run_experiment(config);
  append_results_jsonl(outcome.new_records,
                       config.output_dir + "/results.jsonl");
  write_report(outcome.aggregates, std::nullopt, config, config.output_dir);
  return outcome;
}

void command_augment(const ExperimentConfig& config) {
  if (!config.augmentation.has_value()) {
    throw Error(ErrorKind::InvalidConfig, "config has no augmentation section");
  }
  const ExamplePool pool = load_dataset(config.dataset_path, config.task);
  std::unique_ptr<Gateway> gateway = make_gateway(config, &pool);
  const AugmentationConfig& aug = *config.augmentation;
  const AugmentationOutcome outcome =
      run_augmentation(pool, aug.m, aug.ctx, aug.trials, aug.rating_ctx, aug.policy,
                       *gateway, config.seed);
  std::filesystem::create_directories(config.output_dir);
  save_candidate_audit(outcome, config.output_dir + "/candidates.jsonl");
  save_pool(outcome.augmented, config.output_dir + "/augmented.jsonl");
}

void command_score_difficulty(const ExperimentConfig& config,
                              const std::string& out_path) {
  const ExamplePool pool = load_dataset(config.dataset_path, config.task);
  std::unique_ptr<Gateway> gateway = make_gateway(config, &pool);
  const std::vector<DifficultyScore> scores =
      score_difficulty(pool, *gateway, config.difficulty_trials);
  const std::string path =
      out_path.empty() ? config.output_dir + "/difficulty.jsonl" : out_path;
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  save_difficulty_scores(scores, path);
}

std::vector<MethodScores> method_scores_from_records(
    const std::vector<RunRecord>& records) {
  const std::vector<AggregateResult> aggs = aggregate(records);
  // Observation point per (strategy, dataset): largest shot count at the
  // lowest noise ratio.
  std::map<std::pair<std::string, std::string>, const AggregateResult*> best;
  std::vector<std::pair<std::string, std::string>> order;
  for (const AggregateResult& a : aggs) {
    const auto key = std::make_pair(a.strategy, a.dataset);
    auto it = best.find(key);
    if (it == best.end()) {
      best[key] = &a;
      order.push_back(key);
    } else if (a.noise_ratio < it->second->noise_ratio ||
               (a.noise_ratio == it->second->noise_ratio &&
                a.shot_count > it->second->shot_count)) {
      it->second = &a;
    }
  }
  std::vector<MethodScores> out;
  for (const auto& key : order) {
    const AggregateResult* a = best[key];
    MethodScores scores;
    scores.method = a->strategy;
    scores.dataset = a->dataset;
    scores.task = a->task_kind;
    scores.scores = a->per_run_means;
    out.push_back(std::move(scores));
  }
  return out;
}

void command_analyze(const ExperimentConfig& config, const std::string& kind,
                     const std::vector<std::string>& results_paths,
                     const std::string& baseline_method) {
  std::vector<std::string> paths = results_paths;
  if (paths.empty()) paths.push_back(config.output_dir + "/results.jsonl");

  if (kind == "hull") {
    const ExamplePool pool = load_dataset(config.dataset_path, config.task);
    std::unique_ptr<Gateway> gateway = make_gateway(config, &pool);
    const EmbeddingSet full = embed_pool(*gateway, pool);
    std::vector<std::size_t> shot_grid;
    for (std::size_t s = 1; s < pool.size(); s *= 2) shot_grid.push_back(s);
    shot_grid.push_back(pool.size());
    const Strategy strategy = strategy_is_query_independent(config.plan.strategy)
                                  ? config.plan.strategy
                                  : Strategy::Random;
    std::ostringstream csv;
    csv << "shot_count,coverage_ratio\n";
    for (const std::size_t s : shot_grid) {
      Selection sel;
      if (strategy == Strategy::Diversity) {
        sel = select_diverse(full, s, config.seed);
      } else {
        sel = select_random(pool, s, config.seed);
      }
      EmbeddingSet subset;
      std::map<std::string, std::size_t> index;
      for (std::size_t i = 0; i < full.size(); ++i) index[full.ids[i]] = i;
      for (const std::string& id : sel.demo_ids) {
        subset.ids.push_back(id);
        subset.vectors.push_back(full.vectors[index.at(id)]);
      }
      const HullCoverage cov = convex_hull_coverage(subset, full);
      csv << s << ',' << format_double(cov.ratio, 6) << '\n';
    }
    write_file(config.output_dir + "/curves/hull.csv", csv.str());
    return;
  }

  std::vector<RunRecord> records;
  for (const std::string& path : paths) {
    std::vector<RunRecord> part = load_results_jsonl(path);
    records.insert(records.end(), part.begin(), part.end());
  }

  if (kind == "noise" || kind == "utilization") {
    const std::string fingerprint = config_fingerprint(config);
    std::vector<RunRecord> own;
    for (RunRecord& rec : records) {
      if (rec.fingerprint == fingerprint) own.push_back(std::move(rec));
    }
    if (own.empty()) {
      throw Error(ErrorKind::EmptyRecords,
                  "no logged records match this config fingerprint");
    }
    write_report(aggregate(own), std::nullopt, config, config.output_dir);
    return;
  }

  if (kind == "significance") {
    const SignificanceMatrix matrix = significance_matrix(
        method_scores_from_records(records),
        baseline_method.empty() ? "Random" : baseline_method);
    std::ostringstream md;
    md << "# Significant wins over " << matrix.baseline << " (alpha = "
       << format_double(matrix.alpha, 2) << ")\n\n"
       << format_significance_markdown(matrix);
    write_file(config.output_dir + "/significance.md", md.str());
    return;
  }

  throw Error(ErrorKind::InvalidArgument, "unknown analyze kind: " + kind);
}

void command_report(const ExperimentConfig& config,
                    const std::vector<std::string>& results_paths) {
  std::vector<std::string> paths = results_paths;
  if (paths.empty()) paths.push_back(config.output_dir + "/results.jsonl");
  std::vector<RunRecord> records;
  for (const std::string& path : paths) {
    std::vector<RunRecord> part = load_results_jsonl(path);
    records.insert(records.end(), part.begin(), part.end());
  }
  if (records.empty()) {
    throw Error(ErrorKind::EmptyRecords, "results log holds no records");
  }

  std::optional<SignificanceMatrix> significance;
  std::set<std::string> strategies;
  for (const RunRecord& rec : records) strategies.insert(rec.strategy);
  if (strategies.size() > 1 && strategies.count("Random")) {
    significance = significance_matrix(method_scores_from_records(records), "Random");
  }
  write_report(aggregate(records), significance, config, config.output_dir);
}

}  // namespace icl
