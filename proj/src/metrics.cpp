#include "icl/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "icl/common.hpp"

namespace icl {

namespace {

constexpr int kChrfMaxOrder = 6;
constexpr double kChrfBeta = 2.0;

// Collapse whitespace runs to a single space; spaces stay part of the
// character stream (unlike the exact-match normalization, nothing is trimmed).
std::u32string chrf_characters(const std::string& text) {
  std::u32string decoded = utf8_decode(text);
  std::u32string out;
  out.reserve(decoded.size());
  bool in_run = false;
  for (char32_t c : decoded) {
    const bool ws = c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' ||
                    c == U'\f' || c == U'\v';
    if (ws) {
      if (!in_run) out.push_back(U' ');
      in_run = true;
    } else {
      out.push_back(c);
      in_run = false;
    }
  }
  return out;
}

std::map<std::u32string, std::size_t> ngram_counts(const std::u32string& chars,
                                                   int order) {
  std::map<std::u32string, std::size_t> counts;
  if (static_cast<int>(chars.size()) < order) return counts;
  for (std::size_t i = 0; i + order <= chars.size(); ++i) {
    ++counts[chars.substr(i, order)];
  }
  return counts;
}

std::vector<std::string> tokenize_casefold(const std::string& text) {
  std::istringstream in(ascii_lower(text));
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

}  // namespace

MetricScore chrf(const std::string& hypothesis, const std::string& reference) {
  if (reference.empty()) {
    throw Error(ErrorKind::EmptyReference, "chrf requires a nonempty reference");
  }
  const std::u32string hyp = chrf_characters(hypothesis);
  const std::u32string ref = chrf_characters(reference);

  MetricScore score;
  score.metric_id = MetricId::ChrF;
  double f_sum = 0.0;
  int effective_orders = 0;
  const double beta2 = kChrfBeta * kChrfBeta;
  for (int order = 1; order <= kChrfMaxOrder; ++order) {
    const auto hyp_counts = ngram_counts(hyp, order);
    const auto ref_counts = ngram_counts(ref, order);
    std::size_t hyp_total = 0, ref_total = 0, matches = 0;
    for (const auto& [gram, count] : hyp_counts) hyp_total += count;
    for (const auto& [gram, count] : ref_counts) ref_total += count;
    for (const auto& [gram, count] : hyp_counts) {
      const auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matches += std::min(count, it->second);
    }
    if (hyp_total == 0 && ref_total == 0) continue;
    ++effective_orders;
    const double precision = hyp_total > 0 ? double(matches) / double(hyp_total) : 0.0;
    const double recall = ref_total > 0 ? double(matches) / double(ref_total) : 0.0;
    double f = 0.0;
    if (precision + recall > 0.0) {
      f = (1.0 + beta2) * precision * recall / (beta2 * precision + recall);
    }
    f_sum += f;
    score.details["F" + std::to_string(order)] = f;
    score.details["P" + std::to_string(order)] = precision;
    score.details["R" + std::to_string(order)] = recall;
  }
  score.value = effective_orders > 0 ? f_sum / effective_orders : 0.0;
  return score;
}

MetricScore rouge_l(const std::string& hypothesis, const std::string& reference) {
  if (reference.empty()) {
    throw Error(ErrorKind::EmptyReference, "rouge_l requires a nonempty reference");
  }
  const std::vector<std::string> hyp = tokenize_casefold(hypothesis);
  const std::vector<std::string> ref = tokenize_casefold(reference);

  MetricScore score;
  score.metric_id = MetricId::RougeL;
  if (hyp.empty() || ref.empty()) {
    score.details = {{"lcs", 0.0}, {"precision", 0.0}, {"recall", 0.0}};
    return score;
  }

  // Two-row LCS table.
  std::vector<std::size_t> prev(ref.size() + 1, 0), curr(ref.size() + 1, 0);
  for (std::size_t i = 1; i <= hyp.size(); ++i) {
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      if (hyp[i - 1] == ref[j - 1]) {
        curr[j] = prev[j - 1] + 1;
      } else {
        curr[j] = std::max(prev[j], curr[j - 1]);
      }
    }
    std::swap(prev, curr);
  }
  const double lcs = static_cast<double>(prev[ref.size()]);
  const double precision = lcs / static_cast<double>(hyp.size());
  const double recall = lcs / static_cast<double>(ref.size());
  score.details = {{"lcs", lcs}, {"precision", precision}, {"recall", recall}};
  if (precision + recall > 0.0) {
    score.value = 2.0 * precision * recall / (precision + recall);
  }
  return score;
}

MetricScore exact_match_accuracy(const std::vector<std::string>& predictions,
                                 const std::vector<std::string>& references) {
  if (predictions.size() != references.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "predictions and references differ in length");
  }
  if (predictions.empty()) {
    throw Error(ErrorKind::EmptyInput, "exact match requires at least one pair");
  }
  std::size_t matches = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const std::string p = collapse_whitespace(ascii_lower(trim(predictions[i])));
    const std::string r = collapse_whitespace(ascii_lower(trim(references[i])));
    if (p == r) ++matches;
  }
  MetricScore score;
  score.metric_id = MetricId::ExactMatch;
  score.value = static_cast<double>(matches) / static_cast<double>(predictions.size());
  score.details["matches"] = static_cast<double>(matches);
  score.details["count"] = static_cast<double>(predictions.size());
  return score;
}

MetricScore score_pair(MetricId metric, const std::string& prediction,
                       const std::string& reference) {
  switch (metric) {
    case MetricId::ChrF:
      return chrf(prediction, reference);
    case MetricId::RougeL:
      return rouge_l(prediction, reference);
    case MetricId::ExactMatch:
      return exact_match_accuracy({prediction}, {reference});
  }
  throw Error(ErrorKind::InvalidArgument, "unknown metric");
}

}  // namespace icl
