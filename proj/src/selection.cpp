#include "icl/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "icl/common.hpp"
#include "icl/prng.hpp"

namespace icl {

namespace {

using nlohmann::json;

void check_uniform_dim(const EmbeddingSet& embs) {
  if (embs.ids.size() != embs.vectors.size()) {
    throw Error(ErrorKind::InvalidArgument, "embedding set ids/vectors mismatch");
  }
  for (const EmbeddingVector& v : embs.vectors) {
    if (v.dim() != embs.vectors.front().dim()) {
      throw Error(ErrorKind::DimensionMismatch, "pool embeddings differ in dimension");
    }
  }
}

double dist2(const EmbeddingVector& a, const EmbeddingVector& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace

EmbeddingSet embed_pool(Gateway& gateway, const ExamplePool& pool) {
  std::vector<std::string> texts;
  texts.reserve(pool.size());
  for (const Example& e : pool.examples) texts.push_back(e.input);
  EmbeddingSet out;
  for (const Example& e : pool.examples) out.ids.push_back(e.id);
  out.vectors = gateway.embed(texts);
  return out;
}

Selection select_random(const ExamplePool& pool, std::size_t k, std::uint64_t seed) {
  if (k < 1) {
    throw Error(ErrorKind::InvalidArgument, "shot count k must be >= 1");
  }
  if (pool.examples.empty()) {
    throw Error(ErrorKind::EmptyDataset, "cannot select from an empty pool");
  }
  SplitMix64 rng(seed);
  const std::vector<std::size_t> picks = partial_shuffle(pool.size(), k, rng);
  Selection sel;
  sel.query_dependent = false;
  for (std::size_t i : picks) sel.demo_ids.push_back(pool.examples[i].id);
  return sel;
}

Selection select_relevant(const EmbeddingSet& pool_embs,
                          const EmbeddingVector& query_emb, std::size_t k) {
  if (k < 1) {
    throw Error(ErrorKind::InvalidArgument, "shot count k must be >= 1");
  }
  check_uniform_dim(pool_embs);
  if (pool_embs.size() == 0) {
    throw Error(ErrorKind::EmptyInput, "empty embedding set");
  }
  if (query_emb.dim() != pool_embs.vectors.front().dim()) {
    throw Error(ErrorKind::DimensionMismatch, "query embedding dimension differs");
  }
  std::vector<std::size_t> order(pool_embs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> sims(pool_embs.size());
  for (std::size_t i = 0; i < pool_embs.size(); ++i) {
    sims[i] = cosine(pool_embs.vectors[i], query_emb);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return a < b;
  });
  Selection sel;
  sel.query_dependent = true;
  const std::size_t take = std::min(k, pool_embs.size());
  for (std::size_t i = 0; i < take; ++i) sel.demo_ids.push_back(pool_embs.ids[order[i]]);
  return sel;
}

Selection select_diverse(const EmbeddingSet& pool_embs, std::size_t k,
                         std::uint64_t seed) {
  if (k < 1) {
    throw Error(ErrorKind::InvalidArgument, "shot count k must be >= 1");
  }
  check_uniform_dim(pool_embs);
  const std::size_t n = pool_embs.size();
  if (n == 0) {
    throw Error(ErrorKind::EmptyInput, "empty embedding set");
  }
  k = std::min(k, n);
  const auto& points = pool_embs.vectors;
  const std::size_t dim = points.front().dim();

  // k-means++ seeding.
  SplitMix64 rng(seed);
  std::vector<EmbeddingVector> centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.bounded(n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = dist2(points[i], centroids[0]);
  while (centroids.size() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double r = rng.next_double() * total;
      double cum = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (cum > r) {
          chosen = i;
          break;
        }
      }
    } else {
      // All points coincide with a centroid; take the first index not yet used.
      std::vector<bool> used(n, false);
      for (const EmbeddingVector& c : centroids) {
        for (std::size_t i = 0; i < n; ++i) {
          if (!used[i] && dist2(points[i], c) == 0.0) {
            used[i] = true;
            break;
          }
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (!used[i]) {
          chosen = i;
          break;
        }
      }
    }
    centroids.push_back(points[chosen]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], dist2(points[i], centroids.back()));
    }
  }

  // Lloyd iterations: <= 100 rounds or max centroid movement below 1e-6.
  std::vector<std::size_t> assignment(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = dist2(points[i], centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = dist2(points[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assignment[i] = best;
    }
    double max_move = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      EmbeddingVector mean;
      mean.values.assign(dim, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] != c) continue;
        for (std::size_t d = 0; d < dim; ++d) mean.values[d] += points[i].values[d];
        ++count;
      }
      if (count == 0) continue;  // empty cluster keeps its centroid
      for (double& v : mean.values) v /= static_cast<double>(count);
      max_move = std::max(max_move, std::sqrt(dist2(mean, centroids[c])));
      centroids[c] = std::move(mean);
    }
    if (max_move < 1e-6) break;
  }

  // One representative per cluster: the pool member nearest the centroid,
  // skipping ids already taken.
  Selection sel;
  sel.query_dependent = false;
  std::vector<bool> taken(n, false);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = dist2(points[i], centroids[c]);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (d[a] != d[b]) return d[a] < d[b];
      return a < b;
    });
    for (std::size_t i : order) {
      if (!taken[i]) {
        taken[i] = true;
        sel.demo_ids.push_back(pool_embs.ids[i]);
        break;
      }
    }
  }
  return sel;
}

std::vector<DifficultyScore> score_difficulty(const ExamplePool& pool,
                                              Gateway& gateway, int trials) {
  if (trials < 1) {
    throw Error(ErrorKind::InvalidArgument, "difficulty trials must be >= 1");
  }
  const PromptTemplate& tmpl = builtin_template(pool.task.template_id);
  std::vector<DifficultyScore> scores;
  scores.reserve(pool.size());
  for (const Example& example : pool.examples) {
    const std::string rendered = render_example(tmpl, pool.task, example);
    std::string prompt = difficulty_template();
    const std::size_t pos = prompt.find("{TARGET_SAMPLE}");
    prompt.replace(pos, 15, rendered);
    try {
      const LikertScore likert = gateway.rate_likert(prompt, trials);
      scores.push_back({example.id, likert.value, likert.trials});
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::NoValidRatings) {
        throw Error(ErrorKind::NoValidRatings,
                    "no valid difficulty ratings for example '" + example.id + "'");
      }
      throw;
    }
  }
  return scores;
}

Selection select_by_difficulty(const ExamplePool& pool,
                               const std::vector<DifficultyScore>& scores,
                               std::size_t k, DifficultyMode mode,
                               std::uint64_t seed) {
  std::map<std::string, double> by_id;
  for (const DifficultyScore& s : scores) by_id[s.example_id] = s.value;
  std::map<std::string, std::size_t> pool_index;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const std::string& id = pool.examples[i].id;
    pool_index[id] = i;
    if (!by_id.count(id)) {
      throw Error(ErrorKind::MissingScore, "no difficulty score for example '" + id + "'");
    }
  }

  Selection sel;
  sel.query_dependent = false;
  if (mode == DifficultyMode::Curriculum) {
    sel = select_random(pool, k, seed);
    std::stable_sort(sel.demo_ids.begin(), sel.demo_ids.end(),
                     [&](const std::string& a, const std::string& b) {
                       if (by_id[a] != by_id[b]) return by_id[a] < by_id[b];
                       return pool_index[a] < pool_index[b];
                     });
    sel.query_dependent = false;
    return sel;
  }

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = by_id[pool.examples[a].id];
    const double sb = by_id[pool.examples[b].id];
    if (sa != sb) return sa > sb;
    return a < b;
  });
  const std::size_t take = std::min(k, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    sel.demo_ids.push_back(pool.examples[order[i]].id);
  }
  return sel;
}

Selection order_by_similarity(const Selection& sel, const EmbeddingSet& pool_embs,
                              const EmbeddingVector& query_emb,
                              SimilarityDirection direction) {
  check_uniform_dim(pool_embs);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < pool_embs.size(); ++i) index[pool_embs.ids[i]] = i;
  std::map<std::string, double> sim;
  for (const std::string& id : sel.demo_ids) {
    const auto it = index.find(id);
    if (it == index.end()) {
      throw Error(ErrorKind::InvalidArgument, "selection id missing from embeddings: " + id);
    }
    sim[id] = cosine(pool_embs.vectors[it->second], query_emb);
  }
  Selection out = sel;
  std::stable_sort(out.demo_ids.begin(), out.demo_ids.end(),
                   [&](const std::string& a, const std::string& b) {
                     if (direction == SimilarityDirection::NearestFirst) {
                       return sim[a] > sim[b];
                     }
                     return sim[a] < sim[b];
                   });
  return out;
}

bool strategy_is_query_independent(Strategy strategy) {
  return strategy != Strategy::Relevance;
}

void save_difficulty_scores(const std::vector<DifficultyScore>& scores,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot write difficulty scores: " + path);
  }
  for (const DifficultyScore& s : scores) {
    out << json{{"example_id", s.example_id}, {"value", s.value}, {"trials", s.trials}}.dump()
        << '\n';
  }
}

std::vector<DifficultyScore> load_difficulty_scores(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open difficulty scores: " + path);
  }
  std::vector<DifficultyScore> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.contains("example_id") ||
        !record.contains("value")) {
      throw Error(ErrorKind::MalformedRecord,
                  "malformed difficulty record at line " + std::to_string(line_no));
    }
    scores.push_back({record["example_id"].get<std::string>(),
                      record["value"].get<double>(),
                      record.value("trials", 0)});
  }
  return scores;
}

}  // namespace icl
