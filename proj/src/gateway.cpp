#include "icl/gateway.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "icl/common.hpp"
#include "icl/prng.hpp"

namespace icl {

namespace {

using nlohmann::json;

std::string prompt_tail(const std::string& prompt) {
  std::size_t end = prompt.size();
  while (end > 0) {
    const std::size_t nl = prompt.rfind('\n', end - 1);
    const std::size_t begin = nl == std::string::npos ? 0 : nl + 1;
    const std::string line = prompt.substr(begin, end - begin);
    if (!trim(line).empty()) return line;
    if (nl == std::string::npos) break;
    end = nl;
  }
  return prompt;
}

std::set<std::string> token_set(const std::string& text) {
  std::istringstream in(text);
  std::set<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.insert(tok);
  return tokens;
}

CompletionResponse make_mock_response(const std::string& prompt,
                                      const std::string& reply) {
  CompletionResponse resp;
  resp.text = reply;
  resp.prompt_tokens = count_tokens(prompt);
  resp.output_tokens = count_tokens(reply);
  resp.latency_ms = 0.0;
  return resp;
}

void check_request(const CompletionRequest& req) {
  if (req.prompt.empty()) {
    throw Error(ErrorKind::EmptyInput, "completion prompt must be nonempty");
  }
  if (req.temperature < 0.0 || req.max_output_tokens <= 0) {
    throw Error(ErrorKind::InvalidArgument, "invalid completion request parameters");
  }
}

}  // namespace

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "embedding dimensions differ");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingVector fallback_embed_one(const std::string& text, std::size_t dim,
                                   std::uint64_t seed) {
  EmbeddingVector vec;
  vec.values.assign(dim, 0.0);
  auto add_token = [&](const void* data, std::size_t size) {
    const std::uint64_t mixed = splitmix64_mix(fnv1a64(data, size) ^ seed);
    const std::size_t bucket = static_cast<std::size_t>(mixed % dim);
    vec.values[bucket] += (mixed >> 63) ? -1.0 : 1.0;
  };
  if (text.size() >= 3) {
    for (std::size_t i = 0; i + 3 <= text.size(); ++i) add_token(text.data() + i, 3);
  } else {
    add_token(text.data(), text.size());
  }
  double norm_sq = 0.0;
  for (double v : vec.values) norm_sq += v * v;
  if (norm_sq < 1e-24) {
    // Signed buckets can cancel; fall back to a deterministic basis vector.
    vec.values.assign(dim, 0.0);
    vec.values[fnv1a64(text) % dim] = 1.0;
    norm_sq = 1.0;
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& v : vec.values) v *= inv;
  return vec;
}

std::vector<EmbeddingVector> Backend::embed(const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) {
    out.push_back(fallback_embed_one(t, embedding_dim, embedding_seed));
  }
  return out;
}

CompletionResponse EchoBackend::complete(const CompletionRequest& req) {
  check_request(req);
  return make_mock_response(req.prompt, prompt_tail(req.prompt));
}

CompletionResponse ScriptedBackend::complete(const CompletionRequest& req) {
  check_request(req);
  if (const auto it = exact.find(req.prompt); it != exact.end()) {
    return make_mock_response(req.prompt, it->second);
  }
  for (const auto& [pattern, reply] : contains) {
    if (req.prompt.find(pattern) != std::string::npos) {
      return make_mock_response(req.prompt, reply);
    }
  }
  if (!sequence.empty()) {
    const std::size_t i = sequence_index_.fetch_add(1);
    return make_mock_response(req.prompt, sequence[i % sequence.size()]);
  }
  throw Error(ErrorKind::ResponseMalformed, "scripted backend has no reply for prompt");
}

CompletionResponse CopycatBackend::complete(const CompletionRequest& req) {
  check_request(req);
  if (pool_.empty()) {
    throw Error(ErrorKind::ResponseMalformed, "copycat backend has an empty pool");
  }
  const std::string query_line = prompt_tail(req.prompt);
  const std::set<std::string> query_tokens = token_set(query_line);

  // Candidates are the demonstrations present in the prompt; the whole pool
  // serves as a fallback when none of the inputs were rendered into it.
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (req.prompt.find(pool_[i].input) != std::string::npos) candidates.push_back(i);
  }
  if (candidates.empty()) {
    candidates.resize(pool_.size());
    for (std::size_t i = 0; i < pool_.size(); ++i) candidates[i] = i;
  }
  std::size_t best = candidates.front();
  std::size_t best_overlap = 0;
  bool first = true;
  for (std::size_t i : candidates) {
    const std::set<std::string> tokens = token_set(pool_[i].input);
    std::size_t overlap = 0;
    for (const std::string& t : tokens) overlap += query_tokens.count(t);
    if (first || overlap > best_overlap) {
      best = i;
      best_overlap = overlap;
      first = false;
    }
  }
  return make_mock_response(req.prompt, pool_[best].output);
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw Error(ErrorKind::InvalidConfig, "http backend requires a base_url");
  }
}

CompletionResponse HttpBackend::complete(const CompletionRequest& req) {
  check_request(req);
  httplib::Client client(config_.base_url);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  json body{{"model", config_.model},
            {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
            {"temperature", req.temperature},
            {"max_tokens", req.max_output_tokens}};
  if (req.seed.has_value()) body["seed"] = *req.seed;

  const auto start = std::chrono::steady_clock::now();
  httplib::Result result =
      client.Post(config_.completion_path, headers, body.dump(), "application/json");
  const auto elapsed = std::chrono::steady_clock::now() - start;

  if (!result) {
    throw Error(ErrorKind::BackendUnreachable,
                "http backend unreachable: " + httplib::to_string(result.error()));
  }
  if (result->status == 429) {
    throw Error(ErrorKind::RateLimited, "backend returned 429");
  }
  if (result->status >= 500) {
    throw Error(ErrorKind::BackendUnreachable,
                "backend returned status " + std::to_string(result->status));
  }
  if (result->status != 200) {
    throw Error(ErrorKind::ResponseMalformed,
                "backend returned status " + std::to_string(result->status));
  }
  json parsed = json::parse(result->body, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("choices") ||
      !parsed["choices"].is_array() || parsed["choices"].empty() ||
      !parsed["choices"][0].contains("message") ||
      !parsed["choices"][0]["message"].contains("content") ||
      !parsed["choices"][0]["message"]["content"].is_string()) {
    throw Error(ErrorKind::ResponseMalformed, "unexpected completion response shape");
  }

  CompletionResponse resp;
  resp.text = parsed["choices"][0]["message"]["content"].get<std::string>();
  resp.latency_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count();
  resp.prompt_tokens = count_tokens(req.prompt);
  resp.output_tokens = count_tokens(resp.text);
  if (parsed.contains("usage") && parsed["usage"].is_object()) {
    const json& usage = parsed["usage"];
    if (usage.contains("prompt_tokens") && usage["prompt_tokens"].is_number()) {
      resp.prompt_tokens = {usage["prompt_tokens"].get<std::uint64_t>(),
                            TokenCountMethod::BackendReported};
    }
    if (usage.contains("completion_tokens") && usage["completion_tokens"].is_number()) {
      resp.output_tokens = {usage["completion_tokens"].get<std::uint64_t>(),
                            TokenCountMethod::BackendReported};
    }
  }
  return resp;
}

std::vector<EmbeddingVector> HttpBackend::embed(const std::vector<std::string>& texts) {
  if (config_.embedding_model.empty()) {
    return Backend::embed(texts);
  }
  httplib::Client client(config_.base_url);
  client.set_read_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  json body{{"model", config_.embedding_model}, {"input", texts}};
  httplib::Result result =
      client.Post(config_.embedding_path, headers, body.dump(), "application/json");
  if (!result) {
    throw Error(ErrorKind::BackendUnreachable,
                "http backend unreachable: " + httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw Error(ErrorKind::ResponseMalformed,
                "embedding endpoint returned status " + std::to_string(result->status));
  }
  json parsed = json::parse(result->body, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("data") || !parsed["data"].is_array() ||
      parsed["data"].size() != texts.size()) {
    throw Error(ErrorKind::ResponseMalformed, "unexpected embedding response shape");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const json& item : parsed["data"]) {
    if (!item.contains("embedding") || !item["embedding"].is_array()) {
      throw Error(ErrorKind::ResponseMalformed, "unexpected embedding response shape");
    }
    EmbeddingVector vec;
    vec.values = item["embedding"].get<std::vector<double>>();
    double norm_sq = 0.0;
    for (double v : vec.values) norm_sq += v * v;
    if (norm_sq <= 0.0) {
      throw Error(ErrorKind::ResponseMalformed, "zero-norm embedding from backend");
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : vec.values) v *= inv;
    out.push_back(std::move(vec));
  }
  return out;
}

// --- Gateway -----------------------------------------------------------------

class Gateway::ParallelGuard {
 public:
  explicit ParallelGuard(Gateway& gw) : gw_(gw) {
    std::unique_lock lock(gw_.slots_mutex_);
    gw_.slots_cv_.wait(lock, [&] { return gw_.slots_in_use_ < gw_.config_.max_parallel; });
    ++gw_.slots_in_use_;
  }
  ~ParallelGuard() {
    {
      std::lock_guard lock(gw_.slots_mutex_);
      --gw_.slots_in_use_;
    }
    gw_.slots_cv_.notify_one();
  }

 private:
  Gateway& gw_;
};

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayConfig config)
    : backend_(std::move(backend)), config_(std::move(config)) {
  if (!backend_) {
    throw Error(ErrorKind::InvalidArgument, "gateway requires a backend");
  }
  if (config_.max_parallel < 1 || config_.max_attempts < 1) {
    throw Error(ErrorKind::InvalidConfig, "gateway limits must be positive");
  }
  if (!config_.sleep_ms) {
    config_.sleep_ms = [](int ms) {
      std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    };
  }
}

CompletionResponse Gateway::complete(const CompletionRequest& req) {
  check_request(req);
  const std::uint64_t seq = next_sequence_.fetch_add(1);
  ParallelGuard guard(*this);

  SplitMix64 jitter_rng(config_.seed ^ seq);
  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    try {
      CompletionResponse resp = backend_->complete(req);
      if (config_.log_sink) {
        config_.log_sink({seq, req.prompt, resp.text, false, "", attempt, resp.latency_ms});
      }
      return resp;
    } catch (const Error& err) {
      const bool transient = err.kind() == ErrorKind::BackendUnreachable ||
                             err.kind() == ErrorKind::RateLimited;
      if (!transient || attempt == config_.max_attempts) {
        if (config_.log_sink) {
          config_.log_sink({seq, req.prompt, "", true, err.what(), attempt, 0.0});
        }
        throw;
      }
      last_error = err.what();
      const int backoff = config_.backoff_base_ms << (attempt - 1);
      config_.sleep_ms(backoff + static_cast<int>(jitter_rng.bounded(250)));
    }
  }
  throw Error(ErrorKind::BackendUnreachable, last_error);
}

std::vector<EmbeddingVector> Gateway::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) {
    throw Error(ErrorKind::EmptyInput, "embed requires at least one text");
  }
  ParallelGuard guard(*this);
  std::vector<EmbeddingVector> out = backend_->embed(texts);
  for (const EmbeddingVector& v : out) {
    if (v.dim() == 0) {
      throw Error(ErrorKind::ResponseMalformed, "backend returned empty embedding");
    }
  }
  return out;
}

LikertScore Gateway::rate_likert(const std::string& rating_prompt, int trials) {
  if (trials < 1) {
    throw Error(ErrorKind::InvalidArgument, "rate_likert requires trials >= 1");
  }
  CompletionRequest req;
  req.prompt = rating_prompt;
  req.temperature = 1.0;
  req.max_output_tokens = 16;

  double sum = 0.0;
  int valid = 0;
  for (int t = 0; t < trials; ++t) {
    const CompletionResponse resp = complete(req);
    if (const auto rating = parse_likert_reply(resp.text)) {
      sum += *rating;
      ++valid;
    }
  }
  if (valid == 0) {
    throw Error(ErrorKind::NoValidRatings, "no reply contained a rating in [1,5]");
  }
  return LikertScore{sum / valid, trials, valid};
}

std::optional<int> parse_likert_reply(const std::string& reply) {
  std::size_t i = 0;
  while (i < reply.size()) {
    if (std::isdigit(static_cast<unsigned char>(reply[i]))) {
      std::size_t j = i;
      while (j < reply.size() && std::isdigit(static_cast<unsigned char>(reply[j]))) ++j;
      const std::string run = reply.substr(i, j - i);
      if (run.size() <= 9) {
        const long value = std::strtol(run.c_str(), nullptr, 10);
        if (value >= 1 && value <= 5) return static_cast<int>(value);
      }
      i = j;
    } else {
      ++i;
    }
  }
  return std::nullopt;
}

}  // namespace icl
