#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "icl/corpus.hpp"
#include "icl/gateway.hpp"
#include "icl/selection.hpp"

namespace icl {

struct HullCoverage {
  double ratio = 0.0;
  int projected_dim = 0;
  std::size_t subset_size = 0;
  std::size_t full_size = 0;
};

struct TTestResult {
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
  bool significant = false;
  double alpha = 0.05;
};

struct NoisePlan {
  double ratio = 0.0;
  std::uint64_t seed = 0;
};

enum class Alternative { Greater, TwoSided };

/// Principal-component projection fitted on one point set and applied to
/// others, so related sets share a projection space.
struct PcaProjection {
  std::vector<double> mean;
  std::vector<std::vector<double>> components;  // row per output dimension

  std::vector<std::vector<double>> apply(const std::vector<EmbeddingVector>& points) const;
};

PcaProjection fit_pca(const std::vector<EmbeddingVector>& points, int dim);

/// Hull-volume ratio of a subset to the full set after a shared
/// principal-component projection fitted on the full set.
HullCoverage convex_hull_coverage(const EmbeddingSet& subset,
                                  const EmbeddingSet& full,
                                  int projected_dim = 3,
                                  std::uint64_t seed = 0);

/// Demo sequence with round(ratio*k) outputs replaced by the output of
/// another selected demonstration. Inputs and the pool stay untouched.
std::vector<Example> inject_noise(const std::vector<Example>& demos,
                                  const NoisePlan& plan);
std::vector<Example> inject_noise(const Selection& sel, const ExamplePool& pool,
                                  const NoisePlan& plan);

/// Regularized incomplete beta via the continued-fraction expansion
/// (relative error around 1e-14; exposed for the statistics tests).
double regularized_incomplete_beta(double a, double b, double x);

/// Survival function of Student's t with (possibly fractional) df.
double student_t_sf(double t, double df);

TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b,
                         double alpha = 0.05,
                         Alternative alternative = Alternative::Greater);

struct MethodScores {
  std::string method;
  std::string dataset;
  std::string task;
  std::vector<double> scores;  // one entry per run
};

struct SignificanceCount {
  int wins = 0;
  int total = 0;
};

struct SignificanceMatrix {
  std::string baseline;
  double alpha = 0.05;
  std::vector<std::string> methods;  // first-seen order, baseline excluded
  std::vector<std::string> tasks;    // first-seen order
  std::map<std::pair<std::string, std::string>, SignificanceCount> cells;
  std::map<std::string, SignificanceCount> overall;
};

/// One Greater-test per (method, dataset) against the baseline method;
/// counts significant wins per task group and overall.
SignificanceMatrix significance_matrix(const std::vector<MethodScores>& results,
                                       const std::string& baseline_method,
                                       double alpha = 0.05);

std::string format_significance_markdown(const SignificanceMatrix& matrix);

/// Mean max-cosine of each synthetic vector to the originals, and the hull
/// volume of the union relative to the originals (union-fitted projection).
std::pair<double, double> similarity_and_volume(
    const std::vector<EmbeddingVector>& original,
    const std::vector<EmbeddingVector>& synthetic, int projected_dim = 3,
    std::uint64_t seed = 0);

struct UtilizationStep {
  std::size_t shot_count = 0;
  std::size_t repeats_needed = 0;
  double predicted_utilization = 0.0;
};

/// Doubling shot counts (1, 2, 4, ...) with cyclic repetition past the pool
/// size; the first count whose predicted tokens exceed the context limit is
/// the final entry.
std::vector<UtilizationStep> utilization_schedule(std::size_t pool_size,
                                                  std::uint64_t context_limit_tokens,
                                                  double avg_example_tokens);

}  // namespace icl
