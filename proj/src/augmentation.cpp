#include "icl/augmentation.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "icl/common.hpp"
#include "icl/prng.hpp"

namespace icl {

namespace {

using nlohmann::json;

// Stream id separating quality-rating draws from generation draws.
constexpr std::uint64_t kRatingStream = 0x5241544552ULL;

struct FieldLabels {
  std::string input_label;
  std::string output_label;
};

FieldLabels derive_labels(const PromptTemplate& tmpl, const TaskSpec& task) {
  FieldLabels labels;
  std::istringstream lines(tmpl.example_format);
  std::string line;
  while (std::getline(lines, line)) {
    if (const std::size_t pos = line.find("{input}"); pos != std::string::npos) {
      labels.input_label = line.substr(0, pos);
    }
    if (const std::size_t pos = line.find("{output}"); pos != std::string::npos) {
      labels.output_label = line.substr(0, pos);
    }
  }
  // Labels may mention the language placeholders (translation templates).
  labels.input_label = render_language_placeholders(labels.input_label, task);
  labels.output_label = render_language_placeholders(labels.output_label, task);
  return labels;
}

std::string render_context_block(const PromptTemplate& tmpl, const TaskSpec& task,
                                 const ExamplePool& pool,
                                 const std::vector<std::size_t>& picks) {
  std::string block;
  for (std::size_t i = 0; i < picks.size(); ++i) {
    if (i > 0) block += "\n\n";
    block += render_example(tmpl, task, pool.examples[picks[i]]);
  }
  return block;
}

std::string replace_once(std::string text, const std::string& key,
                         const std::string& value) {
  const std::size_t pos = text.find(key);
  if (pos != std::string::npos) text.replace(pos, key.size(), value);
  return text;
}

}  // namespace

void FilterPolicy::validate() const {
  if (mode == FilterMode::ExplicitThreshold) {
    if (!tau.has_value() || *tau < 1.0 || *tau > 5.0) {
      throw Error(ErrorKind::InvalidArgument,
                  "explicit threshold policy requires tau in [1,5]");
    }
  }
}

std::optional<std::pair<std::string, std::string>> parse_generated_reply(
    const PromptTemplate& tmpl, const TaskSpec& task, const std::string& reply) {
  const FieldLabels labels = derive_labels(tmpl, task);
  std::string input, output;
  if (!labels.output_label.empty()) {
    std::size_t out_pos = reply.find(labels.output_label);
    if (out_pos == std::string::npos) return std::nullopt;
    std::size_t in_begin = 0;
    if (!labels.input_label.empty()) {
      const std::size_t in_pos = reply.find(labels.input_label);
      if (in_pos == std::string::npos || in_pos >= out_pos) return std::nullopt;
      in_begin = in_pos + labels.input_label.size();
    }
    input = reply.substr(in_begin, out_pos - in_begin);
    output = reply.substr(out_pos + labels.output_label.size());
  } else {
    // No output label (e.g. free-form second line): first line is the input.
    std::size_t in_begin = 0;
    if (!labels.input_label.empty()) {
      const std::size_t in_pos = reply.find(labels.input_label);
      if (in_pos == std::string::npos) return std::nullopt;
      in_begin = in_pos + labels.input_label.size();
    }
    const std::size_t nl = reply.find('\n', in_begin);
    if (nl == std::string::npos) return std::nullopt;
    input = reply.substr(in_begin, nl - in_begin);
    output = reply.substr(nl + 1);
  }
  input = trim(input);
  output = trim(output);
  if (input.empty() || output.empty()) return std::nullopt;
  return std::make_pair(input, output);
}

std::vector<CandidateExample> generate_candidates(const ExamplePool& pool,
                                                  std::size_t m,
                                                  std::size_t ctx_size,
                                                  Gateway& gateway,
                                                  std::uint64_t seed) {
  if (m > 0 && (ctx_size < 1 || ctx_size > pool.size())) {
    throw Error(ErrorKind::InvalidArgument,
                "generation context size must be in [1, pool size]");
  }
  const PromptTemplate& tmpl = builtin_template(pool.task.template_id);
  std::vector<CandidateExample> candidates;
  candidates.reserve(m);
  std::size_t parsed_count = 0;
  for (std::size_t j = 0; j < m; ++j) {
    SplitMix64 rng(seed ^ static_cast<std::uint64_t>(j));
    const std::vector<std::size_t> picks = partial_shuffle(pool.size(), ctx_size, rng);
    const std::string prompt = replace_once(
        generation_template(), "{EXAMPLES}",
        render_context_block(tmpl, pool.task, pool, picks));

    CandidateExample cand;
    cand.generation_index = j;
    for (std::size_t p : picks) cand.context_ids.push_back(pool.examples[p].id);
    cand.example.id = "syn-" + std::to_string(j);
    cand.example.provenance = Provenance::Synthetic;

    CompletionRequest req;
    req.prompt = prompt;
    req.temperature = 1.0;
    req.max_output_tokens = 4096;
    for (int attempt = 0; attempt < 2 && !cand.parsed; ++attempt) {
      cand.raw_reply = gateway.complete(req).text;
      if (const auto fields = parse_generated_reply(tmpl, pool.task, cand.raw_reply)) {
        cand.example.input = fields->first;
        cand.example.output = fields->second;
        cand.parsed = true;
      }
    }
    if (cand.parsed) {
      ++parsed_count;
    } else {
      cand.reject_reason = "reply did not match the task example format";
    }
    candidates.push_back(std::move(cand));
  }
  if (m > 0 && parsed_count == 0) {
    throw Error(ErrorKind::GenerationFailed, "no generation reply could be parsed");
  }
  return candidates;
}

QualityScore score_quality(const CandidateExample& candidate,
                           const ExamplePool& pool, Gateway& gateway,
                           int trials, std::size_t ctx, std::uint64_t seed) {
  if (!candidate.parsed) {
    throw Error(ErrorKind::InvalidArgument, "cannot rate an unparsed candidate");
  }
  const PromptTemplate& tmpl = builtin_template(pool.task.template_id);
  ctx = std::min(ctx, pool.size());
  SplitMix64 rng(seed ^ static_cast<std::uint64_t>(candidate.generation_index));
  const std::vector<std::size_t> picks = partial_shuffle(pool.size(), ctx, rng);

  std::string prompt = replace_once(filtering_template(), "{EXAMPLES}",
                                    render_context_block(tmpl, pool.task, pool, picks));
  prompt = replace_once(prompt, "{GENERATED_SAMPLE}",
                        render_example(tmpl, pool.task, candidate.example));
  QualityScore score;
  score.candidate_index = candidate.generation_index;
  score.value = gateway.rate_likert(prompt, trials);
  return score;
}

std::vector<CandidateExample> filter_candidates(
    const std::vector<CandidateExample>& candidates,
    const std::vector<QualityScore>& scores, const FilterPolicy& policy) {
  policy.validate();
  std::vector<double> value_by_index(candidates.size());
  std::vector<bool> have(candidates.size(), false);
  for (const QualityScore& s : scores) {
    if (s.candidate_index < candidates.size()) {
      value_by_index[s.candidate_index] = s.value.value;
      have[s.candidate_index] = true;
    }
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!have[candidates[i].generation_index]) {
      throw Error(ErrorKind::ScoreMissing,
                  "no quality score for candidate " +
                      std::to_string(candidates[i].generation_index));
    }
  }

  std::vector<bool> keep(candidates.size(), false);
  if (policy.mode == FilterMode::MedianHalf) {
    // Top half by rank, which pins the kept count even under score ties
    // (3000 generated -> exactly 1500 retained).
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double sa = value_by_index[candidates[a].generation_index];
      const double sb = value_by_index[candidates[b].generation_index];
      if (sa != sb) return sa > sb;
      return candidates[a].generation_index < candidates[b].generation_index;
    });
    const std::size_t keep_count = candidates.size() / 2;
    for (std::size_t i = 0; i < keep_count; ++i) keep[order[i]] = true;
  } else {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      keep[i] = value_by_index[candidates[i].generation_index] >= *policy.tau;
    }
  }

  std::vector<CandidateExample> kept;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (keep[i]) kept.push_back(candidates[i]);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const CandidateExample& a, const CandidateExample& b) {
                     return a.generation_index < b.generation_index;
                   });
  return kept;
}

ExamplePool build_augmented_set(const ExamplePool& pool,
                                const std::vector<CandidateExample>& kept) {
  ExamplePool out;
  out.task = pool.task;
  out.examples = pool.examples;
  std::set<std::string> original_inputs;
  for (const Example& e : pool.examples) original_inputs.insert(e.input);
  for (const CandidateExample& cand : kept) {
    if (original_inputs.count(cand.example.input)) continue;
    out.examples.push_back(cand.example);
  }
  return out;
}

AugmentationOutcome run_augmentation(const ExamplePool& pool, std::size_t m,
                                     std::size_t ctx_size, int trials,
                                     std::size_t rating_ctx,
                                     const FilterPolicy& policy, Gateway& gateway,
                                     std::uint64_t seed) {
  policy.validate();
  AugmentationOutcome outcome;
  outcome.candidates = generate_candidates(pool, m, ctx_size, gateway, seed);
  outcome.scores.resize(outcome.candidates.size());

  std::vector<CandidateExample> rateable;
  std::vector<QualityScore> scores;
  for (const CandidateExample& cand : outcome.candidates) {
    if (!cand.parsed) continue;
    QualityScore score = score_quality(cand, pool, gateway, trials, rating_ctx,
                                       seed ^ kRatingStream);
    outcome.scores[cand.generation_index] = score;
    rateable.push_back(cand);
    scores.push_back(std::move(score));
  }

  const std::vector<CandidateExample> kept = filter_candidates(rateable, scores, policy);
  outcome.kept.assign(outcome.candidates.size(), false);
  for (const CandidateExample& cand : kept) outcome.kept[cand.generation_index] = true;
  outcome.augmented = build_augmented_set(pool, kept);
  return outcome;
}

void save_candidate_audit(const AugmentationOutcome& outcome, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot write candidate audit: " + path);
  }
  for (std::size_t i = 0; i < outcome.candidates.size(); ++i) {
    const CandidateExample& cand = outcome.candidates[i];
    json row{{"generation_index", cand.generation_index},
             {"id", cand.example.id},
             {"input", cand.example.input},
             {"output", cand.example.output},
             {"raw_reply", cand.raw_reply},
             {"parsed", cand.parsed},
             {"context_ids", cand.context_ids},
             {"kept", static_cast<bool>(outcome.kept[i])}};
    if (!cand.reject_reason.empty()) row["reject_reason"] = cand.reject_reason;
    if (outcome.scores[i].has_value()) {
      row["score"] = outcome.scores[i]->value.value;
      row["score_trials"] = outcome.scores[i]->value.trials;
      row["score_valid_trials"] = outcome.scores[i]->value.valid_trials;
    }
    out << row.dump() << '\n';
  }
}

}  // namespace icl
