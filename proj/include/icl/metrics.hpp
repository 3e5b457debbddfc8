#pragma once

#include <map>
#include <string>
#include <vector>

#include "icl/corpus.hpp"

namespace icl {

struct MetricScore {
  double value = 0.0;
  MetricId metric_id = MetricId::ExactMatch;
  std::map<std::string, double> details;
};

/// Character n-gram F-score, orders 1..6, beta=2 (recall weighted). Runs of
/// whitespace collapse to a single space before counting; orders where
/// neither side has any n-gram are excluded from the average.
MetricScore chrf(const std::string& hypothesis, const std::string& reference);

/// Token-level LCS F1 over whitespace-split, ASCII-casefolded tokens.
MetricScore rouge_l(const std::string& hypothesis, const std::string& reference);

/// Fraction of items matching after trim + casefold + whitespace collapse.
MetricScore exact_match_accuracy(const std::vector<std::string>& predictions,
                                 const std::vector<std::string>& references);

/// Scores one (prediction, reference) pair under the task's metric.
MetricScore score_pair(MetricId metric, const std::string& prediction,
                       const std::string& reference);

}  // namespace icl
