#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icl/corpus.hpp"
#include "icl/gateway.hpp"

namespace icl {

struct CandidateExample {
  Example example;  // provenance Synthetic, id "syn-<generation_index>"
  std::string raw_reply;
  std::size_t generation_index = 0;
  std::vector<std::string> context_ids;
  bool parsed = false;
  std::string reject_reason;
};

struct QualityScore {
  std::size_t candidate_index = 0;
  LikertScore value;
};

enum class FilterMode { MedianHalf, ExplicitThreshold };

struct FilterPolicy {
  FilterMode mode = FilterMode::MedianHalf;
  std::optional<double> tau;

  void validate() const;
};

/// Generates m synthetic candidates, each prompted with ctx_size real
/// examples drawn by the seeded PRNG (stream j for candidate j). Replies are
/// parsed through the task's example format; a parse failure is retried once
/// and then recorded as rejected.
std::vector<CandidateExample> generate_candidates(const ExamplePool& pool,
                                                  std::size_t m,
                                                  std::size_t ctx_size,
                                                  Gateway& gateway,
                                                  std::uint64_t seed);

/// Rates one parsed candidate against ctx seeded-random real examples
/// (fixed per candidate) via the repeated-Likert primitive.
QualityScore score_quality(const CandidateExample& candidate,
                           const ExamplePool& pool, Gateway& gateway,
                           int trials, std::size_t ctx, std::uint64_t seed);

/// MedianHalf keeps the top floor(m/2) by score (ties: lower generation
/// index); ExplicitThreshold keeps score >= tau. Output is in generation
/// order either way.
std::vector<CandidateExample> filter_candidates(
    const std::vector<CandidateExample>& candidates,
    const std::vector<QualityScore>& scores, const FilterPolicy& policy);

/// Originals first in load order, then kept synthetics in generation order;
/// synthetics that duplicate an original input verbatim are dropped.
ExamplePool build_augmented_set(const ExamplePool& pool,
                                const std::vector<CandidateExample>& kept);

/// Parses an LM generation reply into (input, output) using the field labels
/// of the task's example format. Exposed for tests.
std::optional<std::pair<std::string, std::string>> parse_generated_reply(
    const PromptTemplate& tmpl, const TaskSpec& task, const std::string& reply);

struct AugmentationOutcome {
  std::vector<CandidateExample> candidates;
  std::vector<std::optional<QualityScore>> scores;  // nullopt for rejected candidates
  std::vector<bool> kept;
  ExamplePool augmented;
};

/// Full generate -> score -> filter -> union pipeline.
AugmentationOutcome run_augmentation(const ExamplePool& pool, std::size_t m,
                                     std::size_t ctx_size, int trials,
                                     std::size_t rating_ctx,
                                     const FilterPolicy& policy, Gateway& gateway,
                                     std::uint64_t seed);

/// Audit trail: one JSONL row per candidate with raw reply, parse status,
/// score and kept flag.
void save_candidate_audit(const AugmentationOutcome& outcome, const std::string& path);

}  // namespace icl
