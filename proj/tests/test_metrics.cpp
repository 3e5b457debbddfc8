#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "icl/common.hpp"
#include "icl/metrics.hpp"
#include "icl/prng.hpp"

using namespace icl;

namespace {

// Brute-force chrF oracle, independent of the implementation: collapses
// whitespace, enumerates every character n-gram as a plain byte substring
// (fixtures are ASCII) and applies the F_beta definition directly.
std::string oracle_collapse(const std::string& text) {
  std::string out;
  bool in_ws = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      if (!in_ws) out.push_back(' ');
      in_ws = true;
    } else {
      out.push_back(c);
      in_ws = false;
    }
  }
  return out;
}

double oracle_chrf(const std::string& hyp_raw, const std::string& ref_raw) {
  const std::string hyp = oracle_collapse(hyp_raw);
  const std::string ref = oracle_collapse(ref_raw);
  double f_sum = 0.0;
  int orders = 0;
  for (int n = 1; n <= 6; ++n) {
    std::map<std::string, int> hyp_grams, ref_grams;
    for (int i = 0; i + n <= static_cast<int>(hyp.size()); ++i) ++hyp_grams[hyp.substr(i, n)];
    for (int i = 0; i + n <= static_cast<int>(ref.size()); ++i) ++ref_grams[ref.substr(i, n)];
    int hyp_total = 0, ref_total = 0, matched = 0;
    for (const auto& [g, c] : hyp_grams) hyp_total += c;
    for (const auto& [g, c] : ref_grams) ref_total += c;
    for (const auto& [g, c] : hyp_grams) {
      const auto it = ref_grams.find(g);
      if (it != ref_grams.end()) matched += std::min(c, it->second);
    }
    if (hyp_total == 0 && ref_total == 0) continue;
    ++orders;
    const double p = hyp_total ? double(matched) / hyp_total : 0.0;
    const double r = ref_total ? double(matched) / ref_total : 0.0;
    if (p + r > 0.0) f_sum += 5.0 * p * r / (4.0 * p + r);
  }
  return orders ? f_sum / orders : 0.0;
}

// Recursive-with-memo LCS, a different algorithm than the DP table inside
// rouge_l.
int oracle_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b,
               std::size_t i, std::size_t j, std::map<std::pair<std::size_t, std::size_t>, int>& memo) {
  if (i == a.size() || j == b.size()) return 0;
  const auto key = std::make_pair(i, j);
  if (const auto it = memo.find(key); it != memo.end()) return it->second;
  int best;
  if (a[i] == b[j]) {
    best = 1 + oracle_lcs(a, b, i + 1, j + 1, memo);
  } else {
    best = std::max(oracle_lcs(a, b, i + 1, j, memo), oracle_lcs(a, b, i, j + 1, memo));
  }
  memo[key] = best;
  return best;
}

std::vector<std::string> oracle_tokens(const std::string& text) {
  std::string lowered = text;
  for (char& c : lowered) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  std::istringstream in(lowered);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

double oracle_rouge_l(const std::string& hyp_raw, const std::string& ref_raw) {
  const std::vector<std::string> hyp = oracle_tokens(hyp_raw);
  const std::vector<std::string> ref = oracle_tokens(ref_raw);
  if (hyp.empty() || ref.empty()) return 0.0;
  std::map<std::pair<std::size_t, std::size_t>, int> memo;
  const double lcs = oracle_lcs(hyp, ref, 0, 0, memo);
  const double p = lcs / hyp.size();
  const double r = lcs / ref.size();
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

std::string random_string(SplitMix64& rng, std::size_t max_len, bool allow_empty) {
  static const std::string alphabet = "abcdef  ";
  const std::size_t min_len = allow_empty ? 0 : 1;
  const std::size_t len = min_len + rng.bounded(max_len - min_len + 1);
  std::string out;
  for (std::size_t i = 0; i < len; ++i) out.push_back(alphabet[rng.bounded(alphabet.size())]);
  if (!allow_empty && oracle_collapse(out) == " ") out[0] = 'a';
  return out;
}

std::string random_tokens(SplitMix64& rng, std::size_t max_tokens, bool allow_empty) {
  static const std::vector<std::string> words = {"the", "cat", "sat", "dog", "ran", "Big"};
  const std::size_t min_tok = allow_empty ? 0 : 1;
  const std::size_t count = min_tok + rng.bounded(max_tokens - min_tok + 1);
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i > 0) out.push_back(' ');
    out += words[rng.bounded(words.size())];
  }
  if (!allow_empty && out.empty()) out = "the";
  return out;
}

}  // namespace

TEST_CASE("chrf identity and degenerate inputs") {
  CHECK(chrf("hello world", "hello world").value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chrf("ab", "ab").value == doctest::Approx(1.0).epsilon(1e-12));  // shorter than max order
  CHECK(chrf("", "reference").value == 0.0);
  CHECK_THROWS_AS(chrf("anything", ""), Error);
}

TEST_CASE("chrf matches the brute-force oracle on the derived example") {
  const double expected = oracle_chrf("abcd", "abce");
  CHECK(chrf("abcd", "abce").value == doctest::Approx(expected).epsilon(1e-12));
  // Orders 1..4 carry F = 0.75, 2/3, 0.5, 0; orders 5..6 have no n-grams.
  CHECK(expected == doctest::Approx((0.75 + 2.0 / 3.0 + 0.5 + 0.0) / 4.0));
}

TEST_CASE("chrf agrees with the oracle on 100 seeded random pairs") {
  SplitMix64 rng(2025);
  for (int i = 0; i < 100; ++i) {
    const std::string hyp = random_string(rng, 20, true);
    const std::string ref = random_string(rng, 20, false);
    CAPTURE(hyp);
    CAPTURE(ref);
    CHECK(std::abs(chrf(hyp, ref).value - oracle_chrf(hyp, ref)) <= 1e-9);
  }
}

TEST_CASE("chrf weights recall four times precision and is asymmetric") {
  // One-sided containment gives P != R at order 1.
  const MetricScore score = chrf("aab", "aabbbb");
  const double p1 = score.details.at("P1");
  const double r1 = score.details.at("R1");
  CHECK(p1 != r1);
  CHECK(score.details.at("F1") ==
        doctest::Approx(5.0 * p1 * r1 / (4.0 * p1 + r1)).epsilon(1e-12));
  CHECK(chrf("aab", "aabbbb").value != chrf("aabbbb", "aab").value);
}

TEST_CASE("rouge_l pinned examples") {
  CHECK(rouge_l("the cat sat", "the cat sat").value == doctest::Approx(1.0));
  CHECK(rouge_l("dog ran", "the cat sat").value == 0.0);
  const MetricScore score = rouge_l("the cat", "the cat sat");
  CHECK(score.details.at("lcs") == 2.0);
  CHECK(score.details.at("precision") == doctest::Approx(1.0));
  CHECK(score.details.at("recall") == doctest::Approx(2.0 / 3.0));
  CHECK(score.value == doctest::Approx(0.8).epsilon(1e-12));
  CHECK_THROWS_AS(rouge_l("x", ""), Error);
}

TEST_CASE("rouge_l agrees with the recursive oracle and is swap-symmetric") {
  SplitMix64 rng(77);
  for (int i = 0; i < 100; ++i) {
    const std::string hyp = random_tokens(rng, 10, true);
    const std::string ref = random_tokens(rng, 10, false);
    CAPTURE(hyp);
    CAPTURE(ref);
    CHECK(std::abs(rouge_l(hyp, ref).value - oracle_rouge_l(hyp, ref)) <= 1e-9);
    if (!hyp.empty()) {
      CHECK(rouge_l(hyp, ref).value == doctest::Approx(rouge_l(ref, hyp).value));
    }
  }
}

TEST_CASE("exact match normalization and arithmetic") {
  CHECK(exact_match_accuracy({"a", "b"}, {"a", "b"}).value == 1.0);
  CHECK(exact_match_accuracy({"(A) "}, {"(a)"}).value == 1.0);
  CHECK(exact_match_accuracy({"x", "y", "z", "w"}, {"x", "no", "no", "no"}).value == 0.25);
  CHECK(exact_match_accuracy({"two  words"}, {"two words"}).value == 1.0);
  CHECK_THROWS_AS(exact_match_accuracy({"a"}, {"a", "b"}), Error);
  CHECK_THROWS_AS(exact_match_accuracy({}, {}), Error);
}

TEST_CASE("metric range and identity invariants") {
  SplitMix64 rng(31337);
  for (int i = 0; i < 50; ++i) {
    const std::string text = random_string(rng, 12, false);
    CHECK(chrf(text, text).value == doctest::Approx(1.0).epsilon(1e-12));
    const std::string tokens = random_tokens(rng, 6, false);
    CHECK(rouge_l(tokens, tokens).value == doctest::Approx(1.0).epsilon(1e-12));
    const std::string other = random_string(rng, 12, false);
    const double v = chrf(other, text).value;
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("score_pair dispatches on metric id") {
  CHECK(score_pair(MetricId::ExactMatch, "A", "a").value == 1.0);
  CHECK(score_pair(MetricId::RougeL, "the cat", "the cat sat").value ==
        doctest::Approx(0.8));
  CHECK(score_pair(MetricId::ChrF, "abcd", "abcd").value == doctest::Approx(1.0));
}
