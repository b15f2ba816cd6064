#include "structeval/stats.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "structeval/errors.hpp"

namespace structeval::stats {

DistanceMetric metric_from_string(std::string_view s) {
  if (s == "euclidean") return DistanceMetric::Euclidean;
  if (s == "cosine-distance") return DistanceMetric::CosineDistance;
  throw ConfigError("unknown distance metric: " + std::string(s));
}

std::string metric_to_string(DistanceMetric m) {
  return m == DistanceMetric::Euclidean ? "euclidean" : "cosine-distance";
}

EmpiricalDistribution EmpiricalDistribution::from_values(std::vector<double> values) {
  if (values.empty())
    throw Error(ErrorClass::User, "empirical distribution needs at least one observation");
  for (double v : values)
    if (!std::isfinite(v))
      throw Error(ErrorClass::User, "empirical distribution values must be finite");
  std::sort(values.begin(), values.end());
  EmpiricalDistribution d;
  d.numeric_ = true;
  d.values_ = std::move(values);
  return d;
}

EmpiricalDistribution EmpiricalDistribution::from_counts(
    std::map<std::string, std::uint64_t> counts) {
  if (counts.empty())
    throw Error(ErrorClass::User, "empirical distribution needs at least one observation");
  for (const auto& [cat, count] : counts)
    if (count == 0)
      throw Error(ErrorClass::User, "category '" + cat + "' has zero count");
  EmpiricalDistribution d;
  d.numeric_ = false;
  d.counts_ = std::move(counts);
  return d;
}

std::size_t EmpiricalDistribution::observations() const {
  if (numeric_) return values_.size();
  std::size_t total = 0;
  for (const auto& [cat, count] : counts_) total += count;
  return total;
}

double wasserstein2(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
  if (!p.numeric() || !q.numeric())
    throw KindMismatchError("wasserstein2 requires numeric distributions");
  const std::vector<double>& a = p.values();
  const std::vector<double>& b = q.values();
  const std::uint64_t n = a.size();
  const std::uint64_t m = b.size();

  // Piecewise-constant quantile functions; breakpoints compared exactly by
  // cross-multiplication.
  double acc = 0.0;
  double t = 0.0;
  std::uint64_t ia = 0, ib = 0;
  while (ia < n && ib < m) {
    const std::uint64_t lhs = (ia + 1) * m;
    const std::uint64_t rhs = (ib + 1) * n;
    double next_t = lhs <= rhs ? static_cast<double>(ia + 1) / static_cast<double>(n)
                               : static_cast<double>(ib + 1) / static_cast<double>(m);
    double diff = a[ia] - b[ib];
    acc += (next_t - t) * diff * diff;
    t = next_t;
    if (lhs <= rhs) ++ia;
    if (rhs <= lhs) ++ib;
  }
  return std::sqrt(acc);
}

double total_variation(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
  if (p.numeric() || q.numeric())
    throw KindMismatchError("total_variation requires categorical distributions");
  const double np = static_cast<double>(p.observations());
  const double nq = static_cast<double>(q.observations());
  std::set<std::string> categories;
  for (const auto& [cat, count] : p.counts()) categories.insert(cat);
  for (const auto& [cat, count] : q.counts()) categories.insert(cat);
  double sum = 0.0;
  for (const std::string& cat : categories) {
    auto ip = p.counts().find(cat);
    auto iq = q.counts().find(cat);
    double fp = ip == p.counts().end() ? 0.0 : static_cast<double>(ip->second) / np;
    double fq = iq == q.counts().end() ? 0.0 : static_cast<double>(iq->second) / nq;
    sum += std::abs(fp - fq);
  }
  return 0.5 * sum;
}

namespace {

inline double distance(std::span<const double> u, std::span<const double> v,
                       DistanceMetric metric) {
  if (metric == DistanceMetric::Euclidean) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      double d = u[i] - v[i];
      acc += d * d;
    }
    return std::sqrt(acc);
  }
  return 1.0 - embed::cosine_similarity(u, v);
}

void check_dims(const embed::EmbeddingMatrix& a, const embed::EmbeddingMatrix& b) {
  if (a.dimension != b.dimension)
    throw DimensionMismatchError("matrices have dimensions " +
                                 std::to_string(a.dimension) + " and " +
                                 std::to_string(b.dimension));
}

}  // namespace

NeighborRadii knn_radii(const embed::EmbeddingMatrix& points, int k, DistanceMetric metric,
                        int jobs) {
  const std::size_t n = points.rows();
  if (k < 1 || static_cast<std::size_t>(k) >= n) throw KTooLargeError(k, n);
  NeighborRadii out;
  out.k = k;
  out.metric = metric;
  out.radii.assign(n, 0.0);

  int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel num_threads(threads)
  {
    std::vector<double> dists(n - 1);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t w = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        dists[w++] = distance(points.row(i), points.row(j), metric);
      }
      std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
      out.radii[i] = dists[k - 1];
    }
  }
  return out;
}

double coverage_fraction(const embed::EmbeddingMatrix& queries,
                         const embed::EmbeddingMatrix& refs, const NeighborRadii& radii,
                         DistanceMetric metric, int jobs) {
  check_dims(queries, refs);
  if (radii.radii.size() != refs.rows())
    throw DimensionMismatchError("radii were computed on a different reference set");
  const std::size_t nq = queries.rows();
  const std::size_t nr = refs.rows();
  if (nq == 0) throw Error(ErrorClass::User, "coverage_fraction needs at least one query");

  std::size_t covered = 0;
  int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads) reduction(+ : covered)
  for (std::size_t qi = 0; qi < nq; ++qi) {
    for (std::size_t ri = 0; ri < nr; ++ri) {
      if (distance(queries.row(qi), refs.row(ri), metric) <= radii.radii[ri]) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(nq);
}

namespace reference {

NeighborRadii knn_radii(const embed::EmbeddingMatrix& points, int k, DistanceMetric metric) {
  const std::size_t n = points.rows();
  if (k < 1 || static_cast<std::size_t>(k) >= n) throw KTooLargeError(k, n);
  NeighborRadii out;
  out.k = k;
  out.metric = metric;
  out.radii.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> dists;
    dists.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) dists.push_back(distance(points.row(i), points.row(j), metric));
    std::sort(dists.begin(), dists.end());
    out.radii.push_back(dists[k - 1]);
  }
  return out;
}

double coverage_fraction(const embed::EmbeddingMatrix& queries,
                         const embed::EmbeddingMatrix& refs, const NeighborRadii& radii,
                         DistanceMetric metric) {
  check_dims(queries, refs);
  if (radii.radii.size() != refs.rows())
    throw DimensionMismatchError("radii were computed on a different reference set");
  std::size_t covered = 0;
  for (std::size_t qi = 0; qi < queries.rows(); ++qi) {
    bool inside = false;
    for (std::size_t ri = 0; ri < refs.rows() && !inside; ++ri)
      inside = distance(queries.row(qi), refs.row(ri), metric) <= radii.radii[ri];
    if (inside) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(queries.rows());
}

}  // namespace reference

}  // namespace structeval::stats
