#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icl/corpus.hpp"
#include "icl/gateway.hpp"

namespace icl {

enum class Strategy { Random, Relevance, Diversity, Curriculum, Hard };
enum class OrderPolicy { AsSelected, RandomOrder, NearestFirst, NearestLast };

struct SelectionPlan {
  Strategy strategy = Strategy::Random;
  std::size_t k = 1;
  OrderPolicy order = OrderPolicy::AsSelected;
  std::uint64_t seed = 0;
};

struct Selection {
  std::vector<std::string> demo_ids;
  bool query_dependent = false;
};

struct DifficultyScore {
  std::string example_id;
  double value = 0.0;
  int trials = 0;
};

/// Pool embeddings in pool order (parallel to ExamplePool::examples).
struct EmbeddingSet {
  std::vector<std::string> ids;
  std::vector<EmbeddingVector> vectors;

  std::size_t size() const { return ids.size(); }
};

/// Embeds every pool example's input through the gateway.
EmbeddingSet embed_pool(Gateway& gateway, const ExamplePool& pool);

/// One fixed random draw, reused for every query: partial Fisher-Yates over
/// pool indices driven by splitmix64(seed). k > pool size clamps.
Selection select_random(const ExamplePool& pool, std::size_t k, std::uint64_t seed);

/// Top-k by cosine similarity to the query, descending; ties break toward
/// the lower pool index.
Selection select_relevant(const EmbeddingSet& pool_embs,
                          const EmbeddingVector& query_emb, std::size_t k);

/// Seeded k-means++ / Lloyd clustering; returns the pool member nearest each
/// centroid, deduplicated by falling back to the next-nearest member.
Selection select_diverse(const EmbeddingSet& pool_embs, std::size_t k,
                         std::uint64_t seed);

/// Rates every pool example on the 1-5 difficulty scale via the gateway's
/// repeated-Likert primitive. Output order matches pool order.
std::vector<DifficultyScore> score_difficulty(const ExamplePool& pool,
                                              Gateway& gateway, int trials = 30);

enum class DifficultyMode { Curriculum, Hard };

/// Curriculum: random-k draw ordered easiest to hardest. Hard: top-k hardest,
/// ordered hardest first. Ties break toward the lower pool index.
Selection select_by_difficulty(const ExamplePool& pool,
                               const std::vector<DifficultyScore>& scores,
                               std::size_t k, DifficultyMode mode,
                               std::uint64_t seed);

enum class SimilarityDirection { NearestFirst, NearestLast };

/// Stable re-sort of the selected ids by cosine similarity to the query.
Selection order_by_similarity(const Selection& sel, const EmbeddingSet& pool_embs,
                              const EmbeddingVector& query_emb,
                              SimilarityDirection direction);

/// True for every strategy whose demo set is shared across queries, which is
/// exactly the set eligible for provider-side prefix caching.
bool strategy_is_query_independent(Strategy strategy);

void save_difficulty_scores(const std::vector<DifficultyScore>& scores,
                            const std::string& path);
std::vector<DifficultyScore> load_difficulty_scores(const std::string& path);

}  // namespace icl
