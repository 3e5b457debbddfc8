#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "icl/augmentation.hpp"
#include "icl/common.hpp"
#include "icl/prng.hpp"

using namespace icl;

namespace {

ExamplePool reasoning_pool(std::size_t n) {
  ExamplePool pool;
  pool.task.task_kind = TaskKind::Reasoning;
  pool.task.template_id = "reasoning";
  pool.task.metric_id = MetricId::ExactMatch;
  for (std::size_t i = 0; i < n; ++i) {
    pool.examples.push_back({"e" + std::to_string(i), "question " + std::to_string(i),
                             "(A) answer " + std::to_string(i), {}, Provenance::Original});
  }
  return pool;
}

GatewayConfig quiet_config() {
  GatewayConfig cfg;
  cfg.sleep_ms = [](int) {};
  return cfg;
}

// Backend that counts calls and replies from a fixed list (non-cycling).
class CountingBackend : public Backend {
 public:
  explicit CountingBackend(std::vector<std::string> replies)
      : replies_(std::move(replies)) {}
  std::string name() const override { return "counting"; }
  CompletionResponse complete(const CompletionRequest& req) override {
    const std::size_t i = calls++;
    CompletionResponse resp;
    resp.text = replies_[std::min(i, replies_.size() - 1)];
    resp.prompt_tokens = count_tokens(req.prompt);
    resp.output_tokens = count_tokens(resp.text);
    return resp;
  }
  std::size_t calls = 0;

 private:
  std::vector<std::string> replies_;
};

CandidateExample make_candidate(std::size_t index, const std::string& input,
                                const std::string& output) {
  CandidateExample cand;
  cand.generation_index = index;
  cand.example = {"syn-" + std::to_string(index), input, output, {},
                  Provenance::Synthetic};
  cand.parsed = true;
  return cand;
}

QualityScore make_score(std::size_t index, double value) {
  QualityScore s;
  s.candidate_index = index;
  s.value = {value, 30, 30};
  return s;
}

}  // namespace

TEST_CASE("parse_generated_reply follows the task example format labels") {
  const PromptTemplate& reasoning = builtin_template("reasoning");
  TaskSpec task = reasoning_pool(1).task;
  auto parsed = parse_generated_reply(reasoning, task, "Question: q1\nAnswer: a1");
  REQUIRE(parsed.has_value());
  CHECK(parsed->first == "q1");
  CHECK(parsed->second == "a1");

  // Leading chatter before the labels is tolerated; missing labels are not.
  parsed = parse_generated_reply(reasoning, task,
                                 "Sure!\nQuestion: what is 2+2?\nAnswer: (B) 4\n");
  REQUIRE(parsed.has_value());
  CHECK(parsed->first == "what is 2+2?");
  CHECK(parsed->second == "(B) 4");
  CHECK_FALSE(parse_generated_reply(reasoning, task, "no labels at all").has_value());
  CHECK_FALSE(parse_generated_reply(reasoning, task, "Question: only input").has_value());
  CHECK_FALSE(parse_generated_reply(reasoning, task, "Answer: before Question: x").has_value());

  // Translation labels carry the configured languages.
  const PromptTemplate& translation = builtin_template("translation");
  TaskSpec tr;
  tr.task_kind = TaskKind::Translation;
  tr.template_id = "translation";
  tr.metric_id = MetricId::ChrF;
  tr.source_language = "English";
  tr.target_language = "Spanish";
  parsed = parse_generated_reply(translation, tr, "English: hello\nSpanish: hola");
  REQUIRE(parsed.has_value());
  CHECK(parsed->first == "hello");
  CHECK(parsed->second == "hola");

  // FewNERD has a bare {output} line: first line is the input, rest the output.
  const PromptTemplate& fewnerd = builtin_template("fewnerd");
  TaskSpec cls;
  cls.task_kind = TaskKind::Classification;
  cls.template_id = "fewnerd";
  cls.metric_id = MetricId::ExactMatch;
  parsed = parse_generated_reply(fewnerd, cls, "Sentence: Bob visited Paris\nBob: person\nParis: location");
  REQUIRE(parsed.has_value());
  CHECK(parsed->first == "Bob visited Paris");
  CHECK(parsed->second == "Bob: person\nParis: location");
}

TEST_CASE("generate_candidates draws seeded context and parses replies") {
  const ExamplePool pool = reasoning_pool(8);
  auto scripted = std::make_shared<ScriptedBackend>();
  scripted->sequence = {"Question: new q\nAnswer: new a"};
  Gateway gw(scripted, quiet_config());

  CHECK(generate_candidates(pool, 0, 4, gw, 1).empty());

  const std::vector<CandidateExample> cands = generate_candidates(pool, 3, 4, gw, 11);
  REQUIRE(cands.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(cands[j].generation_index == j);
    CHECK(cands[j].example.id == "syn-" + std::to_string(j));
    CHECK(cands[j].example.provenance == Provenance::Synthetic);
    CHECK(cands[j].parsed);
    CHECK(cands[j].example.input == "new q");
    CHECK(cands[j].example.output == "new a");
    CHECK(cands[j].context_ids.size() == 4);
  }
  // Different candidates draw different context streams.
  CHECK(cands[0].context_ids != cands[1].context_ids);

  // Determinism: same seed reproduces the exact context ids.
  auto scripted2 = std::make_shared<ScriptedBackend>();
  scripted2->sequence = scripted->sequence;
  Gateway gw2(scripted2, quiet_config());
  const std::vector<CandidateExample> again = generate_candidates(pool, 3, 4, gw2, 11);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(again[j].context_ids == cands[j].context_ids);
  }

  CHECK_THROWS_AS(generate_candidates(pool, 2, 0, gw, 1), Error);
  CHECK_THROWS_AS(generate_candidates(pool, 2, 99, gw, 1), Error);
}

TEST_CASE("unparseable replies are retried once, then recorded as rejected") {
  const ExamplePool pool = reasoning_pool(4);
  auto flaky = std::make_shared<CountingBackend>(
      std::vector<std::string>{"garbage", "Question: ok\nAnswer: fine"});
  Gateway gw(flaky, quiet_config());
  const std::vector<CandidateExample> cands = generate_candidates(pool, 1, 2, gw, 5);
  REQUIRE(cands.size() == 1);
  CHECK(cands[0].parsed);
  CHECK(flaky->calls == 2);  // one retry

  auto hopeless = std::make_shared<CountingBackend>(std::vector<std::string>{"junk"});
  Gateway gw2(hopeless, quiet_config());
  CHECK_THROWS_AS(generate_candidates(pool, 2, 2, gw2, 5), Error);  // GenerationFailed
  CHECK(hopeless->calls == 4);  // two attempts per candidate

  // Mixed outcome: rejected candidates are recorded, not dropped.
  auto mixed = std::make_shared<CountingBackend>(std::vector<std::string>{
      "junk", "junk", "Question: q\nAnswer: a"});
  Gateway gw3(mixed, quiet_config());
  const std::vector<CandidateExample> out = generate_candidates(pool, 2, 2, gw3, 5);
  REQUIRE(out.size() == 2);
  CHECK_FALSE(out[0].parsed);
  CHECK_FALSE(out[0].reject_reason.empty());
  CHECK(out[1].parsed);
}

TEST_CASE("score_quality renders a clamped seeded context and rates it") {
  const ExamplePool pool = reasoning_pool(10);
  const CandidateExample cand = make_candidate(0, "synthetic q", "synthetic a");

  std::string seen_prompt;
  auto capture = std::make_shared<ScriptedBackend>();
  capture->sequence = {"5"};
  GatewayConfig capture_cfg = quiet_config();
  capture_cfg.log_sink = [&](const GatewayLogEntry& e) { seen_prompt = e.prompt; };
  Gateway gw_logged(capture, capture_cfg);

  const QualityScore s = score_quality(cand, pool, gw_logged, 4, 30, 9);
  CHECK(s.candidate_index == 0);
  CHECK(s.value.value == doctest::Approx(5.0));
  CHECK(s.value.valid_trials == 4);
  // ctx = 30 clamps to the pool size of 10.
  std::size_t rendered = 0;
  for (std::size_t pos = seen_prompt.find("Question:"); pos != std::string::npos;
       pos = seen_prompt.find("Question:", pos + 1)) {
    ++rendered;
  }
  CHECK(rendered == 11);  // 10 context examples + the candidate itself
  CHECK(seen_prompt.find("synthetic q") != std::string::npos);
  CHECK(seen_prompt.find(filtering_template().substr(0, 40)) == 0);

  auto balanced = std::make_shared<ScriptedBackend>();
  balanced->sequence = {"2", "4"};
  Gateway gw2(balanced, quiet_config());
  CHECK(score_quality(cand, pool, gw2, 30, 5, 9).value.value ==
        doctest::Approx(3.0).epsilon(1e-9));

  CandidateExample unparsed;
  unparsed.parsed = false;
  CHECK_THROWS_AS(score_quality(unparsed, pool, gw2, 3, 5, 9), Error);
}

TEST_CASE("filter_candidates median-half keeps exactly floor(m/2) by rank") {
  const std::vector<CandidateExample> cands{
      make_candidate(0, "a", "x"), make_candidate(1, "b", "y")};
  const std::vector<QualityScore> scores{make_score(0, 5.0), make_score(1, 1.0)};
  FilterPolicy median;
  median.mode = FilterMode::MedianHalf;
  const std::vector<CandidateExample> kept = filter_candidates(cands, scores, median);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].generation_index == 0);

  // All scores equal: ties break toward the lower generation index.
  std::vector<CandidateExample> four;
  std::vector<QualityScore> equal;
  for (std::size_t i = 0; i < 4; ++i) {
    four.push_back(make_candidate(i, "in" + std::to_string(i), "out"));
    equal.push_back(make_score(i, 3.0));
  }
  const std::vector<CandidateExample> kept_equal =
      filter_candidates(four, equal, median);
  REQUIRE(kept_equal.size() == 2);
  CHECK(kept_equal[0].generation_index == 0);
  CHECK(kept_equal[1].generation_index == 1);

  // floor(m/2) across odd sizes and any score distribution.
  SplitMix64 rng(6);
  for (std::size_t m = 1; m <= 9; ++m) {
    std::vector<CandidateExample> cs;
    std::vector<QualityScore> ss;
    for (std::size_t i = 0; i < m; ++i) {
      cs.push_back(make_candidate(i, "i" + std::to_string(i), "o"));
      ss.push_back(make_score(i, 1.0 + 4.0 * rng.next_double()));
    }
    CHECK(filter_candidates(cs, ss, median).size() == m / 2);
  }
}

TEST_CASE("filter_candidates explicit threshold and error paths") {
  const std::vector<CandidateExample> cands{
      make_candidate(0, "a", "x"), make_candidate(1, "b", "y"),
      make_candidate(2, "c", "z")};
  const std::vector<QualityScore> scores{
      make_score(0, 2.0), make_score(1, 4.5), make_score(2, 3.0)};
  FilterPolicy threshold;
  threshold.mode = FilterMode::ExplicitThreshold;
  threshold.tau = 3.0;
  const std::vector<CandidateExample> kept =
      filter_candidates(cands, scores, threshold);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].generation_index == 1);  // order preserved (generation order)
  CHECK(kept[1].generation_index == 2);

  FilterPolicy invalid;
  invalid.mode = FilterMode::ExplicitThreshold;
  invalid.tau = 5.1;
  CHECK_THROWS_AS(filter_candidates(cands, scores, invalid), Error);
  FilterPolicy no_tau;
  no_tau.mode = FilterMode::ExplicitThreshold;
  CHECK_THROWS_AS(filter_candidates(cands, scores, no_tau), Error);

  const std::vector<QualityScore> missing{make_score(0, 2.0)};
  FilterPolicy median;
  CHECK_THROWS_AS(filter_candidates(cands, missing, median), Error);
}

TEST_CASE("build_augmented_set keeps originals first and drops verbatim duplicates") {
  const ExamplePool pool = reasoning_pool(2);
  CHECK(build_augmented_set(pool, {}).size() == 2);

  std::vector<CandidateExample> kept{
      make_candidate(0, "fresh question", "a"),
      make_candidate(1, "question 0", "b"),  // duplicates original e0's input
      make_candidate(2, "another question", "c")};
  const ExamplePool aug = build_augmented_set(pool, kept);
  REQUIRE(aug.size() == 4);
  CHECK(aug.examples[0].id == "e0");
  CHECK(aug.examples[1].id == "e1");
  CHECK(aug.examples[2].id == "syn-0");
  CHECK(aug.examples[3].id == "syn-2");
  CHECK(aug.examples[2].provenance == Provenance::Synthetic);
}

TEST_CASE("pipeline: D is a subset of D_AUG and reruns are identical") {
  const ExamplePool pool = reasoning_pool(6);
  FilterPolicy median;

  auto make_gateway = [] {
    auto backend = std::make_shared<ScriptedBackend>();
    // Generation prompts contain the instruction phrase; rating prompts ask
    // for a numerical rating. Vary generated content by nothing: constant.
    backend->contains = {
        {"single numerical rating", "4"},
        {"data augmentation", "Question: brand new\nAnswer: (C) fresh"},
    };
    return Gateway(backend, GatewayConfig{.sleep_ms = [](int) {}});
  };

  Gateway gw1 = make_gateway();
  const AugmentationOutcome a = run_augmentation(pool, 8, 3, 5, 4, median, gw1, 77);
  Gateway gw2 = make_gateway();
  const AugmentationOutcome b = run_augmentation(pool, 8, 3, 5, 4, median, gw2, 77);

  CHECK(a.candidates.size() == 8);
  // MedianHalf keeps floor(8/2) = 4; none duplicates an original input, and
  // synthetic-vs-synthetic duplicates pass through the union untouched.
  CHECK(a.augmented.size() == pool.size() + 4);

  // Originals come first, in order.
  for (std::size_t i = 0; i < pool.size(); ++i) {
    CHECK(a.augmented.examples[i].id == pool.examples[i].id);
  }
  // Determinism: identical outcome structure across reruns.
  REQUIRE(a.candidates.size() == b.candidates.size());
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    CHECK(a.candidates[i].context_ids == b.candidates[i].context_ids);
    CHECK(a.candidates[i].example.input == b.candidates[i].example.input);
    CHECK(a.kept[i] == b.kept[i]);
  }
}
