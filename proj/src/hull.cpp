#include "icl/hull.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "icl/common.hpp"

namespace icl {

namespace {

// Determinant via Gaussian elimination with partial pivoting; m is destroyed.
double determinant(std::vector<std::vector<double>>& m) {
  const std::size_t n = m.size();
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < n; ++row) {
      if (std::abs(m[row][col]) > std::abs(m[pivot][col])) pivot = row;
    }
    if (m[pivot][col] == 0.0) return 0.0;
    if (pivot != col) {
      std::swap(m[pivot], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (std::size_t row = col + 1; row < n; ++row) {
      const double factor = m[row][col] / m[col][col];
      for (std::size_t c = col; c < n; ++c) m[row][c] -= factor * m[col][c];
    }
  }
  return det;
}

struct Facet {
  std::vector<int> vertices;   // d point indices
  std::vector<double> normal;  // unit outward normal
  double offset = 0.0;         // normal . x = offset on the facet plane
  bool alive = true;
};

// Hyperplane normal through d points: null vector of the (d-1) edge vectors,
// computed by cofactor expansion.
std::vector<double> facet_normal(const std::vector<std::vector<double>>& pts,
                                 const std::vector<int>& vertices) {
  const std::size_t d = pts[0].size();
  std::vector<std::vector<double>> edges(d - 1, std::vector<double>(d));
  for (std::size_t i = 0; i + 1 < d; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      edges[i][c] = pts[vertices[i + 1]][c] - pts[vertices[0]][c];
    }
  }
  std::vector<double> normal(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<std::vector<double>> minor(d - 1, std::vector<double>(d - 1));
    for (std::size_t r = 0; r + 1 < d; ++r) {
      std::size_t cc = 0;
      for (std::size_t c = 0; c < d; ++c) {
        if (c == j) continue;
        minor[r][cc++] = edges[r][c];
      }
    }
    const double cofactor = determinant(minor);
    normal[j] = (j % 2 == 0) ? cofactor : -cofactor;
  }
  return normal;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

// Greedy affinely-independent simplex: repeatedly add the point with the
// largest residual against the orthonormal basis of the chosen edge vectors.
std::vector<int> initial_simplex(const std::vector<std::vector<double>>& pts,
                                 double scale) {
  const std::size_t d = pts[0].size();
  std::vector<int> chosen{0};
  std::vector<std::vector<double>> basis;
  for (std::size_t step = 0; step < d; ++step) {
    double best_norm = 0.0;
    int best = -1;
    std::vector<double> best_residual;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::vector<double> r(d);
      for (std::size_t c = 0; c < d; ++c) r[c] = pts[i][c] - pts[chosen[0]][c];
      for (const auto& b : basis) {
        const double proj = dot(r, b);
        for (std::size_t c = 0; c < d; ++c) r[c] -= proj * b[c];
      }
      const double norm = std::sqrt(dot(r, r));
      if (norm > best_norm) {
        best_norm = norm;
        best = static_cast<int>(i);
        best_residual = std::move(r);
      }
    }
    if (best < 0 || best_norm <= 1e-12 * std::max(scale, 1.0)) return {};
    for (double& v : best_residual) v /= best_norm;
    basis.push_back(std::move(best_residual));
    chosen.push_back(best);
  }
  return chosen;
}

double simplex_volume_from(const std::vector<std::vector<double>>& pts,
                           const std::vector<double>& apex,
                           const std::vector<int>& vertices) {
  const std::size_t d = apex.size();
  std::vector<std::vector<double>> m(d, std::vector<double>(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t c = 0; c < d; ++c) m[i][c] = pts[vertices[i]][c] - apex[c];
  }
  return std::abs(determinant(m));
}

}  // namespace

double hull_volume(const std::vector<std::vector<double>>& points) {
  if (points.empty()) return 0.0;
  const std::size_t d = points[0].size();
  if (d == 0 || d > 8) {
    throw Error(ErrorKind::InvalidArgument, "hull dimension must be in [1,8]");
  }
  for (const auto& p : points) {
    if (p.size() != d) {
      throw Error(ErrorKind::DimensionMismatch, "hull points differ in dimension");
    }
  }
  if (d == 1) {
    double lo = points[0][0], hi = points[0][0];
    for (const auto& p : points) {
      lo = std::min(lo, p[0]);
      hi = std::max(hi, p[0]);
    }
    return hi - lo;
  }

  // Deduplicate exact copies; they contribute nothing and slow the scan.
  std::vector<std::vector<double>> pts;
  {
    std::set<std::vector<double>> seen;
    for (const auto& p : points) {
      if (seen.insert(p).second) pts.push_back(p);
    }
  }
  if (pts.size() < d + 1) return 0.0;

  double scale = 0.0;
  for (const auto& p : pts) {
    for (double v : p) scale = std::max(scale, std::abs(v));
  }

  const std::vector<int> simplex = initial_simplex(pts, scale);
  if (simplex.empty()) return 0.0;

  std::vector<double> interior(d, 0.0);
  for (int v : simplex) {
    for (std::size_t c = 0; c < d; ++c) interior[c] += pts[v][c];
  }
  for (double& v : interior) v /= static_cast<double>(d + 1);

  auto make_facet = [&](std::vector<int> vertices) {
    Facet f;
    f.vertices = std::move(vertices);
    f.normal = facet_normal(pts, f.vertices);
    const double norm = std::sqrt(dot(f.normal, f.normal));
    if (norm > 0.0) {
      for (double& v : f.normal) v /= norm;
    }
    f.offset = dot(f.normal, pts[f.vertices[0]]);
    if (dot(f.normal, interior) > f.offset) {
      for (double& v : f.normal) v = -v;
      f.offset = -f.offset;
    }
    return f;
  };

  std::vector<Facet> facets;
  for (std::size_t drop = 0; drop < simplex.size(); ++drop) {
    std::vector<int> vertices;
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i != drop) vertices.push_back(simplex[i]);
    }
    facets.push_back(make_facet(std::move(vertices)));
  }

  const double eps = 1e-10 * std::max(scale, 1.0);
  std::set<int> in_simplex(simplex.begin(), simplex.end());
  for (int p = 0; p < static_cast<int>(pts.size()); ++p) {
    if (in_simplex.count(p)) continue;
    std::vector<std::size_t> visible;
    for (std::size_t f = 0; f < facets.size(); ++f) {
      if (facets[f].alive && dot(facets[f].normal, pts[p]) > facets[f].offset + eps) {
        visible.push_back(f);
      }
    }
    if (visible.empty()) continue;

    // Horizon: ridges covered by exactly one visible facet (the hull is
    // closed, so the neighbor across such a ridge is invisible).
    std::map<std::vector<int>, int> ridge_count;
    for (std::size_t f : visible) {
      for (std::size_t drop = 0; drop < facets[f].vertices.size(); ++drop) {
        std::vector<int> ridge;
        for (std::size_t i = 0; i < facets[f].vertices.size(); ++i) {
          if (i != drop) ridge.push_back(facets[f].vertices[i]);
        }
        std::sort(ridge.begin(), ridge.end());
        ++ridge_count[ridge];
      }
    }
    for (std::size_t f : visible) facets[f].alive = false;
    for (const auto& [ridge, count] : ridge_count) {
      if (count != 1) continue;
      std::vector<int> vertices = ridge;
      vertices.push_back(p);
      facets.push_back(make_facet(std::move(vertices)));
    }
  }

  double volume = 0.0;
  for (const Facet& f : facets) {
    if (f.alive) volume += simplex_volume_from(pts, interior, f.vertices);
  }
  double factorial = 1.0;
  for (std::size_t i = 2; i <= d; ++i) factorial *= static_cast<double>(i);
  return volume / factorial;
}

}  // namespace icl
