#pragma once

#include <vector>

namespace icl {

/// Exact convex hull volume of a point set in dimension d (1..8) via
/// incremental facet construction and simplex decomposition from an interior
/// point. Returns 0 when the set is affinely degenerate (fewer than d+1
/// independent points).
double hull_volume(const std::vector<std::vector<double>>& points);

}  // namespace icl
