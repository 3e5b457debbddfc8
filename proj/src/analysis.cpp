#include "icl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "icl/common.hpp"
#include "icl/hull.hpp"
#include "icl/prng.hpp"

namespace icl {

namespace {

Eigen::MatrixXd to_matrix(const std::vector<EmbeddingVector>& points) {
  if (points.empty()) {
    throw Error(ErrorKind::EmptyInput, "no points to project");
  }
  const std::size_t dim = points.front().dim();
  Eigen::MatrixXd m(points.size(), dim);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim() != dim) {
      throw Error(ErrorKind::DimensionMismatch, "points differ in dimension");
    }
    for (std::size_t c = 0; c < dim; ++c) m(i, c) = points[i].values[c];
  }
  return m;
}

constexpr double kDegenerateVolume = 1e-12;

}  // namespace

std::vector<std::vector<double>> PcaProjection::apply(
    const std::vector<EmbeddingVector>& points) const {
  std::vector<std::vector<double>> out;
  out.reserve(points.size());
  for (const EmbeddingVector& p : points) {
    if (p.dim() != mean.size()) {
      throw Error(ErrorKind::DimensionMismatch, "point does not match projection space");
    }
    std::vector<double> row(components.size(), 0.0);
    for (std::size_t r = 0; r < components.size(); ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < mean.size(); ++c) {
        sum += (p.values[c] - mean[c]) * components[r][c];
      }
      row[r] = sum;
    }
    out.push_back(std::move(row));
  }
  return out;
}

PcaProjection fit_pca(const std::vector<EmbeddingVector>& points, int dim) {
  const Eigen::MatrixXd m = to_matrix(points);
  const int out_dim = std::min<int>(dim, static_cast<int>(m.cols()));
  if (out_dim < 1) {
    throw Error(ErrorKind::InvalidArgument, "projection dimension must be >= 1");
  }
  const Eigen::RowVectorXd mean = m.colwise().mean();
  const Eigen::MatrixXd centered = m.rowwise() - mean;
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(m.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidArgument, "eigendecomposition failed");
  }

  PcaProjection proj;
  proj.mean.assign(mean.data(), mean.data() + mean.size());
  // Eigen sorts eigenvalues ascending; take the top out_dim, largest first,
  // with a sign convention (largest-magnitude entry positive) so the
  // projection is reproducible across runs.
  for (int r = 0; r < out_dim; ++r) {
    Eigen::VectorXd v = solver.eigenvectors().col(m.cols() - 1 - r);
    int arg_max = 0;
    for (int c = 1; c < v.size(); ++c) {
      if (std::abs(v(c)) > std::abs(v(arg_max))) arg_max = c;
    }
    if (v(arg_max) < 0.0) v = -v;
    proj.components.emplace_back(v.data(), v.data() + v.size());
  }
  return proj;
}

HullCoverage convex_hull_coverage(const EmbeddingSet& subset,
                                  const EmbeddingSet& full, int projected_dim,
                                  std::uint64_t /*seed*/) {
  const std::set<std::string> full_ids(full.ids.begin(), full.ids.end());
  for (const std::string& id : subset.ids) {
    if (!full_ids.count(id)) {
      throw Error(ErrorKind::InvalidArgument,
                  "subset id not in the full set: " + id);
    }
  }
  if (full.size() <= static_cast<std::size_t>(projected_dim)) {
    throw Error(ErrorKind::InvalidArgument,
                "full set must exceed the projected dimension");
  }

  const PcaProjection proj = fit_pca(full.vectors, projected_dim);
  const double full_volume = hull_volume(proj.apply(full.vectors));
  if (full_volume < kDegenerateVolume) {
    throw Error(ErrorKind::DegenerateHull,
                "full-set hull volume is degenerate after projection");
  }
  const double subset_volume = hull_volume(proj.apply(subset.vectors));

  HullCoverage coverage;
  coverage.ratio = subset_volume / full_volume;
  coverage.projected_dim = static_cast<int>(proj.components.size());
  coverage.subset_size = subset.size();
  coverage.full_size = full.size();
  return coverage;
}

std::vector<Example> inject_noise(const std::vector<Example>& demos,
                                  const NoisePlan& plan) {
  if (plan.ratio < 0.0 || plan.ratio > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "noise ratio must be in [0,1]");
  }
  std::vector<Example> out = demos;
  const std::size_t k = demos.size();
  const std::size_t victims =
      static_cast<std::size_t>(std::floor(plan.ratio * static_cast<double>(k) + 0.5));
  if (victims == 0) return out;
  if (k < 2) {
    throw Error(ErrorKind::TooFewExamples,
                "noise injection needs at least two demonstrations");
  }

  SplitMix64 rng(plan.seed);
  const std::vector<std::size_t> victim_positions = partial_shuffle(k, victims, rng);
  for (const std::size_t victim : victim_positions) {
    std::size_t donor = static_cast<std::size_t>(rng.bounded(k - 1));
    if (donor >= victim) ++donor;
    // With cyclic repetition the donor position may hold the victim's id;
    // walk forward to the next position with a different id.
    std::size_t probes = 0;
    while (demos[donor].id == demos[victim].id && probes < k) {
      donor = (donor + 1) % k;
      if (donor == victim) donor = (donor + 1) % k;
      ++probes;
    }
    if (demos[donor].id == demos[victim].id) {
      throw Error(ErrorKind::TooFewExamples,
                  "noise injection needs two distinct demonstrations");
    }
    out[victim].output = demos[donor].output;
  }
  return out;
}

std::vector<Example> inject_noise(const Selection& sel, const ExamplePool& pool,
                                  const NoisePlan& plan) {
  std::vector<Example> demos;
  demos.reserve(sel.demo_ids.size());
  for (const std::string& id : sel.demo_ids) {
    const Example* e = pool.find(id);
    if (e == nullptr) {
      throw Error(ErrorKind::InvalidArgument, "selection id not in pool: " + id);
    }
    demos.push_back(*e);
  }
  return inject_noise(demos, plan);
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "beta parameters must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double df) {
  if (df <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "degrees of freedom must be positive");
  }
  const double x = df / (df + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x);
  return t >= 0.0 ? tail : 1.0 - tail;
}

TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b,
                         double alpha, Alternative alternative) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorKind::TooFewSamples, "welch test needs at least two samples per side");
  }
  for (double v : a) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite sample");
  }
  for (double v : b) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite sample");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (double v : a) mean_a += v;
  for (double v : b) mean_b += v;
  mean_a /= na;
  mean_b /= nb;
  double var_a = 0.0, var_b = 0.0;
  for (double v : a) var_a += (v - mean_a) * (v - mean_a);
  for (double v : b) var_b += (v - mean_b) * (v - mean_b);
  var_a /= (na - 1.0);
  var_b /= (nb - 1.0);

  TTestResult result;
  result.alpha = alpha;
  if (var_a == 0.0 && var_b == 0.0) {
    // Degenerate case pinned by contract: equal constant samples are
    // maximally insignificant; unequal ones maximally significant.
    result.degrees_of_freedom = na + nb - 2.0;
    if (mean_a == mean_b) {
      result.t_statistic = 0.0;
      result.p_value = 1.0;
    } else {
      result.t_statistic = mean_a > mean_b
                               ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
      if (alternative == Alternative::TwoSided) {
        result.p_value = 0.0;
      } else {
        result.p_value = mean_a > mean_b ? 0.0 : 1.0;
      }
    }
    result.significant = result.p_value < alpha;
    return result;
  }

  const double se_a = var_a / na;
  const double se_b = var_b / nb;
  result.t_statistic = (mean_a - mean_b) / std::sqrt(se_a + se_b);
  result.degrees_of_freedom =
      (se_a + se_b) * (se_a + se_b) /
      (se_a * se_a / (na - 1.0) + se_b * se_b / (nb - 1.0));
  if (alternative == Alternative::Greater) {
    result.p_value = student_t_sf(result.t_statistic, result.degrees_of_freedom);
  } else {
    result.p_value =
        regularized_incomplete_beta(result.degrees_of_freedom / 2.0, 0.5,
                                    result.degrees_of_freedom /
                                        (result.degrees_of_freedom +
                                         result.t_statistic * result.t_statistic));
  }
  result.significant = result.p_value < alpha;
  return result;
}

SignificanceMatrix significance_matrix(const std::vector<MethodScores>& results,
                                       const std::string& baseline_method,
                                       double alpha) {
  SignificanceMatrix matrix;
  matrix.baseline = baseline_method;
  matrix.alpha = alpha;

  std::map<std::string, const MethodScores*> baseline_by_dataset;
  for (const MethodScores& r : results) {
    if (r.method == baseline_method) baseline_by_dataset[r.dataset] = &r;
  }
  for (const MethodScores& r : results) {
    if (r.method == baseline_method) continue;
    const auto base = baseline_by_dataset.find(r.dataset);
    if (base == baseline_by_dataset.end()) {
      throw Error(ErrorKind::MissingBaseline,
                  "no baseline scores for dataset '" + r.dataset + "'");
    }
    if (std::find(matrix.methods.begin(), matrix.methods.end(), r.method) ==
        matrix.methods.end()) {
      matrix.methods.push_back(r.method);
    }
    if (std::find(matrix.tasks.begin(), matrix.tasks.end(), r.task) ==
        matrix.tasks.end()) {
      matrix.tasks.push_back(r.task);
    }
    const TTestResult test =
        welch_t_test(r.scores, base->second->scores, alpha, Alternative::Greater);
    SignificanceCount& cell = matrix.cells[{r.method, r.task}];
    SignificanceCount& total = matrix.overall[r.method];
    cell.total += 1;
    total.total += 1;
    if (test.significant) {
      cell.wins += 1;
      total.wins += 1;
    }
  }
  return matrix;
}

std::string format_significance_markdown(const SignificanceMatrix& matrix) {
  std::ostringstream out;
  out << "| Method |";
  for (const std::string& task : matrix.tasks) out << ' ' << task << " |";
  out << " Total |\n";
  out << "| --- |";
  for (std::size_t i = 0; i < matrix.tasks.size(); ++i) out << " --- |";
  out << " --- |\n";
  for (const std::string& method : matrix.methods) {
    out << "| " << method << " |";
    for (const std::string& task : matrix.tasks) {
      const auto it = matrix.cells.find({method, task});
      if (it == matrix.cells.end()) {
        out << " - |";
      } else {
        out << ' ' << it->second.wins << " / " << it->second.total << " |";
      }
    }
    const auto total = matrix.overall.find(method);
    out << ' ' << total->second.wins << " / " << total->second.total << " |\n";
  }
  return out.str();
}

std::pair<double, double> similarity_and_volume(
    const std::vector<EmbeddingVector>& original,
    const std::vector<EmbeddingVector>& synthetic, int projected_dim,
    std::uint64_t /*seed*/) {
  if (original.empty() || synthetic.empty()) {
    throw Error(ErrorKind::EmptyInput, "both point sets must be nonempty");
  }
  double similarity = 0.0;
  for (const EmbeddingVector& s : synthetic) {
    double best = -1.0;
    for (const EmbeddingVector& o : original) {
      best = std::max(best, cosine(s, o));
    }
    similarity += best;
  }
  similarity /= static_cast<double>(synthetic.size());

  std::vector<EmbeddingVector> all = original;
  all.insert(all.end(), synthetic.begin(), synthetic.end());
  const PcaProjection proj = fit_pca(all, projected_dim);
  const double original_volume = hull_volume(proj.apply(original));
  if (original_volume < kDegenerateVolume) {
    throw Error(ErrorKind::DegenerateHull,
                "original hull volume is degenerate after projection");
  }
  const double union_volume = hull_volume(proj.apply(all));
  return {similarity, union_volume / original_volume};
}

std::vector<UtilizationStep> utilization_schedule(std::size_t pool_size,
                                                  std::uint64_t context_limit_tokens,
                                                  double avg_example_tokens) {
  if (pool_size == 0 || context_limit_tokens == 0 || avg_example_tokens <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "schedule inputs must be positive");
  }
  std::vector<UtilizationStep> steps;
  for (std::size_t shots = 1;; shots *= 2) {
    const double predicted_tokens = static_cast<double>(shots) * avg_example_tokens;
    UtilizationStep step;
    step.shot_count = shots;
    step.repeats_needed = (shots + pool_size - 1) / pool_size;
    step.predicted_utilization =
        predicted_tokens / static_cast<double>(context_limit_tokens);
    steps.push_back(step);
    if (predicted_tokens > static_cast<double>(context_limit_tokens)) break;
    if (shots > (std::size_t{1} << 40)) break;  // absurd-limit safety stop
  }
  return steps;
}

}  // namespace icl
