#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "icl/corpus.hpp"

namespace icl {

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.0;
  int max_output_tokens = 1024;
  std::optional<std::uint64_t> seed;
};

struct CompletionResponse {
  std::string text;
  TokenCount prompt_tokens;
  TokenCount output_tokens;
  double latency_ms = 0.0;
};

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct LikertScore {
  double value = 0.0;
  int trials = 0;
  int valid_trials = 0;
};

/// Deterministic feature-hashing embedder: bag of byte trigrams hashed into
/// `dim` signed buckets, L2-normalized. Texts shorter than one trigram hash
/// as a single token.
EmbeddingVector fallback_embed_one(const std::string& text, std::size_t dim,
                                   std::uint64_t seed);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual CompletionResponse complete(const CompletionRequest& req) = 0;
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts);

  // Deterministic backends report zero latency so record streams stay
  // byte-identical across reruns.
  virtual bool deterministic() const { return true; }

  std::uint64_t embedding_seed = 0;
  std::size_t embedding_dim = 64;
};

/// Replies with the prompt tail: the text after the last newline, falling
/// back to the last nonempty line.
class EchoBackend : public Backend {
 public:
  std::string name() const override { return "echo"; }
  CompletionResponse complete(const CompletionRequest& req) override;
};

/// Replies from an exact prompt->reply table, then ordered substring rules,
/// then a cyclic fallback sequence. Unmatched prompts raise ResponseMalformed.
class ScriptedBackend : public Backend {
 public:
  std::map<std::string, std::string> exact;
  std::vector<std::pair<std::string, std::string>> contains;
  std::vector<std::string> sequence;

  std::string name() const override { return "scripted"; }
  CompletionResponse complete(const CompletionRequest& req) override;

 private:
  std::atomic<std::size_t> sequence_index_{0};
};

/// Replies with the output of the in-prompt demonstration whose input has
/// the highest whitespace-token overlap with the query line.
class CopycatBackend : public Backend {
 public:
  explicit CopycatBackend(std::vector<Example> pool) : pool_(std::move(pool)) {}

  std::string name() const override { return "copycat"; }
  CompletionResponse complete(const CompletionRequest& req) override;

 private:
  std::vector<Example> pool_;
};

struct HttpBackendConfig {
  std::string base_url;
  std::string model;
  std::string completion_path = "/v1/chat/completions";
  std::string embedding_path = "/v1/embeddings";
  std::string embedding_model;  // empty: use the local fallback embedder
  std::string api_key_env = "ICL_API_KEY";
  int timeout_seconds = 120;
};

/// JSON-over-HTTP chat-completion client. Request body carries
/// {model, messages:[{role,content}], temperature, max_tokens, seed?};
/// the reply is read from choices[0].message.content and usage.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string name() const override { return "http"; }
  bool deterministic() const override { return false; }
  CompletionResponse complete(const CompletionRequest& req) override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

 private:
  HttpBackendConfig config_;
};

struct GatewayLogEntry {
  std::uint64_t sequence = 0;
  std::string prompt;
  std::string reply;
  bool failed = false;
  std::string error;
  int attempts = 0;
  double latency_ms = 0.0;
};

struct GatewayConfig {
  int max_parallel = 4;
  int max_attempts = 3;
  int backoff_base_ms = 1000;
  std::uint64_t seed = 0;
  std::function<void(int)> sleep_ms;                    // injectable for tests
  std::function<void(const GatewayLogEntry&)> log_sink; // optional
};

/// Uniform access to a backend with retry, a concurrent-request bound, and
/// sequence-numbered request logging. Prompts pass through unmodified.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, GatewayConfig config = {});

  CompletionResponse complete(const CompletionRequest& req);
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts);

  /// Issues the rating prompt `trials` times at temperature 1.0 and averages
  /// the parsed 1-5 ratings over valid replies.
  LikertScore rate_likert(const std::string& rating_prompt, int trials = 30);

  Backend& backend() { return *backend_; }
  std::uint64_t requests_issued() const { return next_sequence_.load(); }

 private:
  class ParallelGuard;

  std::shared_ptr<Backend> backend_;
  GatewayConfig config_;
  std::atomic<std::uint64_t> next_sequence_{0};
  std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  int slots_in_use_ = 0;
};

/// First maximal digit run with a value in [1,5], if any.
std::optional<int> parse_likert_reply(const std::string& reply);

}  // namespace icl
